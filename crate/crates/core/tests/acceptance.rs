//! End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1 on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;

use caloron_core::coefficients;
use caloron_core::gauge::{curvature_of, loop_mesh, GaugePair, GroupMap, Side};
use caloron_core::holonomy::{higgs_holonomy, loop_holonomy, HolonomyOptions};
use caloron_core::invariants::{
    beta_quadrature, chern_simons_relative, chern_weil, circle_distance, degree1_character, odd_chern_character,
    string_form, string_potential_relative, string_potential_total, transgression_pullback, AffineFormPath,
    CaloronPath, CutoffFunction, SmoothPath, SymTrace, T_QUAD_NODES,
};
use caloron_core::ktheory::{homotopy_cs_integral, homotopy_integrand_max, nullhomotopy_construct};
use caloron_core::linalg::{self, C64};
use caloron_core::loopcore::{GroupSpec, SampledLoop};
use caloron_core::meshforms::{MatrixForm, Mesh};
use caloron_core::samples::{
    analytic_pair, random_based_gauge, random_based_loop, random_form, random_homotopy, random_pair, random_skew, rng,
    sphere_identity_map, PairShape, UnitaryTrigMap,
};
use num_bigint::BigInt;
use num_rational::BigRational;

type Outcome = Result<(bool, String), caloron_core::Error>;

fn f(k: usize) -> SymTrace {
    SymTrace::new(k).unwrap()
}

fn within(label: &str, residual: f64, tol: f64) -> (bool, String) {
    (residual <= tol, format!("{label} {residual:.3e} <= {tol:.0e}"))
}

fn all(parts: Vec<(bool, String)>) -> (bool, String) {
    let ok = parts.iter().all(|p| p.0);
    let text = parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join("; ");
    (ok, text)
}

fn torus(dims: &[usize]) -> Mesh {
    Mesh::torus(dims).unwrap()
}

/// Winding by unwrapping the phase of the determinant between samples.
fn det_phase_winding(l: &SampledLoop) -> f64 {
    let n = l.rank();
    let dets: Vec<C64> = l.iter().map(|g| linalg::determinant(g, n)).collect();
    let mut total = 0.0;
    for j in 0..dets.len() {
        total += (dets[(j + 1) % dets.len()] / dets[j]).arg();
    }
    total / (2.0 * PI)
}

fn winding_integrality() -> Outcome {
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    let mut agree = true;
    for _ in 0..50 {
        let (l, k) = random_based_loop(&mut r, 2, 128, 4, 4)?;
        let w = l.winding_number()?;
        agree &= w.value == k && (det_phase_winding(&l) - k as f64).abs() < 1e-9;
        worst = worst.max(w.distance);
    }
    let mut additive = true;
    for _ in 0..50 {
        let (a, ka) = random_based_loop(&mut r, 2, 128, 3, 3)?;
        let (b, kb) = random_based_loop(&mut r, 2, 128, 3, 3)?;
        additive &= a.block_sum(&b)?.winding_number()?.value == ka + kb;
        additive &= a.pointwise_product(&b)?.winding_number()?.value == ka + kb;
    }
    let (ok, text) = within("max distance to integer", worst, 1e-9);
    Ok((ok && agree && additive, format!("{text}; oracle agreement {agree}; additivity {additive}")))
}

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

fn fact(n: usize) -> BigRational {
    (1..=n as i64).fold(q(1, 1), |a, k| a * q(k, 1))
}

fn coefficient_identities() -> Outcome {
    let mut exact = true;
    for k in 1..=10usize {
        let b = fact(k - 1) * fact(k - 1) / fact(2 * k - 1);
        // direct alternating sum, computed here
        let mut s = q(0, 1);
        for i in 0..k {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            s += fact(k - 1) / (fact(i) * fact(k - 1 - i)) * q(sign, (k + i) as i64);
        }
        exact &= s == b && coefficients::beta_alternating_sum(k)? == b && coefficients::beta_kk(k)? == b;
        let half = |i: usize| (0..i).fold(q(1, 1), |a, _| a * q(-1, 2));
        for i in 0..k {
            let c = half(i) * fact(k) * fact(k - 1) / (fact(k + i) * fact(k - 1 - i));
            exact &= coefficients::series_coefficient(k, i)? == c;
        }
        exact &= coefficients::transgression_prefactor(k)? == half(k - 1) * fact(k) * fact(k - 1) / fact(2 * k - 1);
    }
    exact &= coefficients::pretty_fraction(&coefficients::transgression_prefactor(2)?) == "\u{2212}1/6";
    let beta_f64 = |k: usize| (1..k).fold(1.0, |b, j| b * (j * j) as f64 / ((2 * j) * (2 * j + 1)) as f64);
    let custom = CutoffFunction::new(
        "smoothstep",
        |t| {
            let s = t / (2.0 * PI);
            s * s * (3.0 - 2.0 * s)
        },
        |t| {
            let s = t / (2.0 * PI);
            6.0 * s * (1.0 - s) / (2.0 * PI)
        },
    )?;
    let mut worst: f64 = 0.0;
    for alpha in [CutoffFunction::cosine(), custom, CutoffFunction::linear()] {
        for k in 1..=10 {
            let (v, _) = beta_quadrature(k, &alpha, 64)?;
            worst = worst.max((v - beta_f64(k)).abs());
        }
    }
    let (ok, text) = within("cutoff quadrature vs B(k,k)", worst, 1e-8);
    Ok((ok && exact, format!("exact tables {exact}; {text}")))
}

fn pair_t2(seed: u64, n_theta: usize) -> GaugePair {
    random_pair(&mut rng(seed), &torus(&[16, 16]), PairShape { n_theta, ..Default::default() }).unwrap()
}

fn caloron_curvature() -> Outcome {
    let p = pair_t2(301, 64);
    let full = curvature_of(&p.caloron_transform()?)?;
    let dth = MatrixForm::coordinate_differential(p.mesh(), p.loop_axis())?;
    let split = p.connection().curvature()?.add(&p.higgs_cov_derivative()?.wedge(&dth)?)?;
    let back = GaugePair::inverse_caloron_transform(p.spec(), &p.caloron_transform()?)?;
    Ok(all(vec![within("curvature identity", full.distance(&split)?, 1e-10), within("round trip", back.distance(&p)?, 0.0)]))
}

fn string_factorizations() -> Outcome {
    let (p0, p1) = (pair_t2(401, 64), pair_t2(402, 64));
    let path = SmoothPath::affine(&p0, &p1)?;
    let axis = p0.loop_axis();
    let mut worst: f64 = 0.0;
    for k in [1, 2] {
        let s = string_form(f(k), &p0)?;
        worst = worst.max(s.distance(&chern_weil(f(k), &p0.caloron_transform()?)?.fiber_integrate(axis)?)?);
        let pot = string_potential_relative(f(k), &path, T_QUAD_NODES)?;
        let cs = chern_simons_relative(f(k), &CaloronPath::new(&path), T_QUAD_NODES)?.fiber_integrate(axis)?;
        worst = worst.max(pot.distance(&cs)?);
    }
    Ok(within("factorization residual", worst, 1e-9))
}

fn descends(k: usize, p0: &GaugePair, p1: &GaugePair) -> Result<f64, caloron_core::Error> {
    let path = SmoothPath::affine(p0, p1)?;
    let ds = string_potential_relative(f(k), &path, T_QUAD_NODES)?.d();
    ds.distance(&string_form(f(k), p1)?.sub(&string_form(f(k), p0)?)?)
}

fn string_potential_identity() -> Outcome {
    let (p0, p1) = (pair_t2(501, 32), pair_t2(502, 32));
    let mut worst = descends(1, &p0, &p1)?.max(descends(2, &p0, &p1)?);
    let shape3 = PairShape { n_theta: 16, ..Default::default() };
    let base3 = torus(&[16, 16, 16]);
    let q0 = random_pair(&mut rng(503), &base3, shape3)?;
    let q1 = random_pair(&mut rng(504), &base3, shape3)?;
    worst = worst.max(descends(2, &q0, &q1)?);
    let analytic = |m: usize| -> Result<f64, caloron_core::Error> {
        let base = torus(&[m, m, m]);
        let mut r = rng(505);
        let a0 = analytic_pair(&mut r, &base, m, 2)?;
        let a1 = analytic_pair(&mut r, &base, m, 2)?;
        descends(2, &a0, &a1)
    };
    let (e8, e16) = (analytic(8)?, analytic(16)?);
    Ok(all(vec![
        within("dS - (s1 - s0)", worst, 1e-8),
        (e8 >= 4.0 * e16, format!("analytic data residual {e8:.2e} -> {e16:.2e} under doubling")),
    ]))
}

fn same_endpoint() -> Outcome {
    let (p0, p1, off) = (pair_t2(601, 32), pair_t2(602, 32), pair_t2(603, 32));
    let knot = p0.affine(&p1, 0.35)?.affine(&off, 0.5)?;
    let straight = SmoothPath::affine(&p0, &p1)?;
    let bent = SmoothPath::cubic(&[(0.0, p0.clone()), (0.35, knot), (1.0, p1.clone())])?;
    let a = string_potential_relative(f(2), &straight, T_QUAD_NODES)?;
    let b = string_potential_relative(f(2), &bent, T_QUAD_NODES)?;
    let distinct = a.distance(&b)?;
    let periods = b.sub(&a)?.max_period()?;
    let (ok, text) = within("max period of S(bent) - S(straight)", periods, 1e-8);
    Ok((ok && distinct > 1e-6, format!("{text}; potentials differ pointwise by {distinct:.2e}")))
}

fn total_potential() -> Outcome {
    let mut worst: f64 = 0.0;
    let p = pair_t2(701, 32);
    let shape3 = PairShape { n_theta: 16, ..Default::default() };
    let q = random_pair(&mut rng(702), &torus(&[16, 16, 16]), shape3)?;
    for pair in [&p, &q] {
        for k in [1, 2] {
            worst = worst.max(string_potential_total(f(k), pair)?.d().distance(&string_form(f(k), pair)?)?);
        }
    }
    Ok(within("d S_total - s_f", worst, 1e-8))
}

fn odd_chern() -> Outcome {
    let circle = Arc::new(Mesh::circle(32)?);
    let mut winding: f64 = 0.0;
    for k in -3i32..=3 {
        let g = GroupMap::from_fn(&circle, GroupSpec::unitary(1), |x| vec![C64::from_polar(1.0, k as f64 * x[0])])?;
        let v = odd_chern_character(&g, None)?.part(1).unwrap().integrate_top_scalar()?;
        winding = winding.max((v - C64::new(k as f64, 0.0)).norm());
    }
    let sphere = |n_eta: usize, n_xi: usize| -> Result<C64, caloron_core::Error> {
        odd_chern_character(&sphere_identity_map(n_eta, n_xi)?, None)?.part(3).unwrap().integrate_top_scalar()
    };
    let (coarse, fine) = (sphere(32, 16)?, sphere(64, 32)?);
    let unit = fine.re.round();
    let sphere_res = (coarse - unit).norm().max((fine - unit).norm());
    let mesh = Arc::new(torus(&[16, 16, 16]));
    let mut r = rng(801);
    let g = UnitaryTrigMap::random(&mut r, 2, &[1, 1, 1], 2).sample(&mesh)?;
    let h = UnitaryTrigMap::random(&mut r, 2, &[1, 1, 1], 2).sample(&mesh)?;
    let ch = |m: &GroupMap| odd_chern_character(m, None);
    let additive = ch(&g.block_sum(&h)?)?.distance(&ch(&g)?.add(&ch(&h)?)?)?;
    let inverse = ch(&g.inverse()?)?.add(&ch(&g)?)?.max_abs();
    Ok(all(vec![
        within("circle windings", winding, 1e-9),
        (unit.abs() == 1.0, format!("sphere integral {:.8} and {:.8}", coarse.re, fine.re)),
        within("sphere vs unit at two resolutions", sphere_res, 1e-5),
        within("additivity", additive, 1e-10),
        within("inverse", inverse, 1e-10),
    ]))
}

fn nullhomotopy() -> Outcome {
    let mut r = rng(901);
    let (mut integrand, mut integral): (f64, f64) = (0.0, 0.0);
    for dims in [vec![32], vec![16, 16]] {
        let mesh = Arc::new(torus(&dims));
        for _ in 0..20 {
            let g = UnitaryTrigMap::random(&mut r, 2, &vec![1; dims.len()], 3).sample(&mesh)?;
            let h = nullhomotopy_construct(&g)?;
            integrand = homotopy_integrand_max(&h, None)?.into_iter().fold(integrand, f64::max);
            integral = integral.max(homotopy_cs_integral(&h, None)?.max_abs());
        }
    }
    Ok(all(vec![within("integrand", integrand, 1e-10), within("integral", integral, 1e-10)]))
}

fn twz_curvature() -> Outcome {
    let mesh = Arc::new(torus(&[32, 32]));
    let mut r = rng(1001);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let h = random_homotopy(&mut r, &mesh, 2, 1)?;
        let cs = homotopy_cs_integral(&h, None)?;
        let diff = odd_chern_character(&h.at(1.0)?, None)?.sub(&odd_chern_character(&h.at(0.0)?, None)?)?;
        worst = worst.max(cs.d()?.distance(&diff)?);
    }
    Ok(within("d CS(h) - (ch g1 - ch g0)", worst, 1e-8))
}

fn holonomy() -> Outcome {
    let mut r = rng(1101);
    let mut pure: f64 = 0.0;
    for _ in 0..10 {
        let (g, _) = random_based_loop(&mut r, 2, 64, 3, 2)?;
        let h = loop_holonomy(&g.log_derivative()?, HolonomyOptions { steps: 2048, ..Default::default() })?;
        pure = pure.max(linalg::identity_defect(&h.endpoint, 2));
    }
    let (a, b) = (random_skew(&mut r, 2, 1.5), random_skew(&mut r, 2, 1.5));
    let phi = SampledLoop::algebra_from_fn(GroupSpec::unitary(2), 32, |t| {
        linalg::add(&linalg::scale(&a, C64::new(t.cos(), 0.0)), &linalg::scale(&b, C64::new((2.0 * t).sin(), 0.0)))
    })?;
    let end = |steps| loop_holonomy(&phi, HolonomyOptions { steps, error_limit: f64::INFINITY, ..Default::default() }).map(|h| h.endpoint);
    let (h1, h2, h4) = (end(64)?, end(128)?, end(256)?);
    let order = (linalg::max_abs(&linalg::sub(&h1, &h2)) / linalg::max_abs(&linalg::sub(&h2, &h4))).log2();
    let mut periods: f64 = 0.0;
    for dims in [vec![32], vec![32, 32]] {
        let shape = PairShape { n_theta: 32, base_band: 1, theta_band: 1, modes: 2, scale: 0.3, ..Default::default() };
        let p = random_pair(&mut r, &torus(&dims), shape)?;
        let hol = higgs_holonomy(p.higgs(), HolonomyOptions::default())?;
        let diff = string_form(f(1), &p)?.sub(&transgression_pullback(f(1), &hol.holonomy)?)?;
        periods = periods.max(diff.max_period()?);
    }
    Ok(all(vec![
        within("pure gauge", pure, 1e-7),
        (order >= 3.7, format!("measured order {order:.2} >= 3.7")),
        within("string vs holonomy periods", periods, 1e-6),
    ]))
}

fn degree1_character_invariance() -> Outcome {
    let p = pair_t2(1201, 32);
    let base = torus(&[16, 16]);
    let before = degree1_character(p.higgs())?;
    let mut r = rng(1202);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let gamma = random_based_gauge(&mut r, &base, 32, 2, 1)?;
        let (q, _) = p.gauge_transform(&gamma)?;
        for (a, b) in before.iter().zip(degree1_character(q.higgs())?) {
            worst = worst.max(circle_distance(*a, b));
        }
    }
    Ok(within("character change mod Z", worst, 1e-9))
}

fn flat_path() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut r = rng(1301);
    for dims in [vec![16, 16], vec![16, 16, 16]] {
        let mesh = Arc::new(torus(&dims));
        let g = UnitaryTrigMap::random(&mut r, 2, &vec![1; dims.len()], 2).sample(&mesh)?;
        let theta = g.mc_pullback(Side::Left)?;
        let path = AffineFormPath::new(MatrixForm::zero(&mesh, 1, 2)?, theta.clone())?;
        // degree one directly: tr(g^-1 dg) / 2 pi i
        let tau1 = theta.trace().scale(C64::new(0.0, -1.0 / (2.0 * PI)));
        worst = worst.max(chern_simons_relative(f(1), &path, T_QUAD_NODES)?.distance(&tau1)?);
        let top = if dims.len() >= 3 { 2 } else { 1 };
        for k in 1..=top {
            worst = worst.max(chern_simons_relative(f(k), &path, T_QUAD_NODES)?.distance(&transgression_pullback(f(k), &g)?)?);
        }
    }
    Ok(within("CS(d + t g*Theta) - g*tau", worst, 1e-9))
}

fn fiber_axioms() -> Outcome {
    let mesh = loop_mesh(&torus(&[16, 16]), 32)?;
    let mut r = rng(1401);
    let (mut commute, mut fubini, mut slices): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for degree in 1..=3 {
        let w = random_form(&mut r, &mesh, degree, 2, 2)?;
        if degree < 3 {
            commute = commute.max(w.fiber_integrate(2)?.d().distance(&w.d().fiber_integrate(2)?)?);
            for index in [0, 5, 15] {
                slices = slices.max(w.fiber_integrate(2)?.slice(0, index)?.distance(&w.slice(0, index)?.fiber_integrate(1)?)?);
            }
        } else {
            let whole = w.integrate_top()?;
            for axis in 0..3 {
                fubini = fubini.max(linalg::max_abs(&linalg::sub(&whole, &w.fiber_integrate(axis)?.integrate_top()?)));
            }
        }
    }
    Ok(all(vec![within("d commutes", commute, 1e-10), within("Fubini", fubini, 1e-10), within("slices", slices, 1e-10)]))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("winding integrality", winding_integrality),
        ("beta and coefficient identities", coefficient_identities),
        ("caloron curvature identity", caloron_curvature),
        ("string form and potential factorization", string_factorizations),
        ("relative string potential identity", string_potential_identity),
        ("same-endpoint periods", same_endpoint),
        ("total string potential", total_potential),
        ("odd Chern character", odd_chern),
        ("nullhomotopy vanishing", nullhomotopy),
        ("homotopy integral as primitive", twz_curvature),
        ("Higgs-field holonomy", holonomy),
        ("degree-1 character invariance", degree1_character_invariance),
        ("flat path", flat_path),
        ("fiber integration axioms", fiber_axioms),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!("{} {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
