//! Seeded generators of bandlimited test data.
//!
//! Every generator draws from a `ChaCha8Rng` seeded with a `u64`, so equal
//! seeds give identical data on every platform. The data are trigonometric
//! polynomials, so products stay bandlimited and discrete identities hold to
//! rounding once the grid resolves the product bandwidth.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::gauge::{loop_mesh, GaugePair, GroupMap};
use crate::ktheory::HomotopySpec;
use crate::linalg::{self, C64, ZERO};
use crate::loopcore::{GroupSpec, SampledLoop};
use crate::meshforms::{MatrixForm, Mesh};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(rng: &mut impl Rng) -> f64 {
    rng.gen_range(-1.0..1.0)
}

/// Random skew-Hermitian matrix with entries of size about `scale`.
pub fn random_skew(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<C64> {
    let mut m: Vec<C64> = (0..n * n).map(|_| C64::new(uniform(rng), uniform(rng)) * scale).collect();
    linalg::skew_project(&mut m, n);
    m
}

/// Orthogonal projector onto a random complex line.
pub fn random_projector(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| C64::new(uniform(rng), uniform(rng))).collect();
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let mut p = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = v[i] * v[j].conj() / norm2;
        }
    }
    p
}

/// `P e^{i phase} + (I - P)` for a projector `P`.
pub fn projector_phase(p: &[C64], n: usize, phase: f64) -> Vec<C64> {
    let e = C64::from_polar(1.0, phase) - linalg::ONE;
    let mut out = linalg::identity(n);
    for (o, x) in out.iter_mut().zip(p) {
        *o += x * e;
    }
    out
}

/// A skew-Hermitian trigonometric polynomial `sum_k A_k cos(k.x) + B_k sin(k.x)`.
#[derive(Clone, Debug)]
pub struct TrigField {
    n: usize,
    modes: Vec<(Vec<f64>, Vec<C64>, Vec<C64>)>,
}

impl TrigField {
    /// `count` random modes with integer wavevector entries bounded by `bandwidth[a]` per axis.
    pub fn random(rng: &mut impl Rng, n: usize, bandwidth: &[i32], count: usize, scale: f64) -> Self {
        let modes = (0..count)
            .map(|_| {
                let k = bandwidth.iter().map(|&b| rng.gen_range(-b..=b) as f64).collect();
                (k, random_skew(rng, n, scale), random_skew(rng, n, scale))
            })
            .collect();
        TrigField { n, modes }
    }

    pub fn zero(n: usize) -> Self {
        TrigField { n, modes: Vec::new() }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.n * self.n];
        for (k, a, b) in &self.modes {
            let phase: f64 = k.iter().zip(x).map(|(k, x)| k * x).sum();
            let (s, c) = phase.sin_cos();
            for (o, (x, y)) in out.iter_mut().zip(a.iter().zip(b)) {
                *o += x * c + y * s;
            }
        }
        out
    }

    pub fn sample(&self, mesh: &Arc<Mesh>) -> MatrixForm {
        MatrixForm::function(mesh, self.n, |x| self.eval(x))
    }

    /// The field `x -> f(x + t v)`; `v` may be shorter than the wavevectors,
    /// missing entries count as zero.
    pub fn translated(&self, v: &[f64], t: f64) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|(k, a, b)| {
                let c = t * k.iter().zip(v).map(|(k, v)| k * v).sum::<f64>();
                let (sn, cs) = c.sin_cos();
                let a2 = a.iter().zip(b).map(|(a, b)| a * cs + b * sn).collect();
                let b2 = a.iter().zip(b).map(|(a, b)| b * cs - a * sn).collect();
                (k.clone(), a2, b2)
            })
            .collect();
        TrigField { n: self.n, modes }
    }

    /// The derivative `v . grad f`.
    pub fn directional(&self, v: &[f64]) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|(k, a, b)| {
                let kv: f64 = k.iter().zip(v).map(|(k, v)| k * v).sum();
                (k.clone(), linalg::scale(b, C64::new(kv, 0.0)), linalg::scale(a, C64::new(-kv, 0.0)))
            })
            .collect();
        TrigField { n: self.n, modes }
    }
}

/// Based unitary loop `prod_j (P_j e^{i k_j theta} + I - P_j)` with `|k_j| <= max_k`.
/// Returns the loop and its winding number `sum_j k_j`.
pub fn random_based_loop(rng: &mut impl Rng, n: usize, len: usize, factors: usize, max_k: i32) -> Result<(SampledLoop, i64)> {
    let parts: Vec<(Vec<C64>, i32)> =
        (0..factors).map(|_| (random_projector(rng, n), rng.gen_range(-max_k..=max_k))).collect();
    let winding = parts.iter().map(|(_, k)| *k as i64).sum();
    let l = SampledLoop::group_from_fn(GroupSpec::unitary(n), len, |t| {
        parts
            .iter()
            .fold(linalg::identity(n), |acc, (p, k)| linalg::mul(&acc, &projector_phase(p, n, *k as f64 * t), n))
    })?;
    Ok((l, winding))
}

/// Bandlimited unitary map `prod_j (P_j e^{i m_j . x} + I - P_j)`.
#[derive(Clone, Debug)]
pub struct UnitaryTrigMap {
    n: usize,
    parts: Vec<(Vec<C64>, Vec<f64>)>,
}

impl UnitaryTrigMap {
    pub fn random(rng: &mut impl Rng, n: usize, bandwidth: &[i32], factors: usize) -> Self {
        let parts = (0..factors)
            .map(|_| {
                let p = random_projector(rng, n);
                let m = bandwidth.iter().map(|&b| rng.gen_range(-b..=b) as f64).collect();
                (p, m)
            })
            .collect();
        UnitaryTrigMap { n, parts }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<C64> {
        self.parts.iter().fold(linalg::identity(self.n), |acc, (p, m)| {
            let phase: f64 = m.iter().zip(x).map(|(m, x)| m * x).sum();
            linalg::mul(&acc, &projector_phase(p, self.n, phase), self.n)
        })
    }

    pub fn eval_inverse(&self, x: &[f64]) -> Vec<C64> {
        linalg::adjoint(&self.eval(x), self.n)
    }

    pub fn sample(&self, mesh: &Arc<Mesh>) -> Result<GroupMap> {
        GroupMap::from_fn(mesh, GroupSpec::unitary(self.n), |x| self.eval(x))
    }
}

/// Based gauge transform `U(x) L(theta) U(x)^{-1}` on `base x Circle(n_theta)`,
/// with `U` a bandlimited unitary map of the base and `L` a based projector loop.
pub fn random_based_gauge(rng: &mut impl Rng, base: &Mesh, n_theta: usize, n: usize, band: i32) -> Result<GroupMap> {
    let bw = vec![band; base.dim()];
    let u = UnitaryTrigMap::random(rng, n, &bw, 2);
    let mut theta_bw = vec![0; base.dim()];
    theta_bw.push(band);
    let loop_parts = UnitaryTrigMap::random(rng, n, &theta_bw, 2);
    let mesh = loop_mesh(base, n_theta)?;
    let d = base.dim();
    GroupMap::from_fn(&mesh, GroupSpec::unitary(n), |x| {
        let l = loop_parts.eval(x);
        let ux = u.eval(&x[..d]);
        linalg::mul3(&ux, &l, &linalg::adjoint(&ux, n), n)
    })
}

/// Parameters for random gauge pairs.
#[derive(Clone, Copy, Debug)]
pub struct PairShape {
    pub rank: usize,
    pub n_theta: usize,
    /// Max wavenumber per base axis.
    pub base_band: i32,
    /// Max wavenumber along the loop.
    pub theta_band: i32,
    pub modes: usize,
    pub scale: f64,
}

impl Default for PairShape {
    fn default() -> Self {
        PairShape { rank: 2, n_theta: 16, base_band: 1, theta_band: 2, modes: 3, scale: 0.5 }
    }
}

/// A gauge pair given by trigonometric polynomials in all coordinates,
/// so it can be evaluated at translated points.
#[derive(Clone, Debug)]
pub struct TrigPair {
    rank: usize,
    conn: Vec<TrigField>,
    phi: TrigField,
}

impl TrigPair {
    pub fn random(rng: &mut impl Rng, base_dim: usize, shape: PairShape) -> Self {
        let mut bw = vec![shape.base_band; base_dim];
        bw.push(shape.theta_band);
        let n = shape.rank;
        let conn = (0..base_dim).map(|_| TrigField::random(rng, n, &bw, shape.modes, shape.scale)).collect();
        let phi = TrigField::random(rng, n, &bw, shape.modes, shape.scale);
        TrigPair { rank: n, conn, phi }
    }

    /// The pair sampled on `base x Circle(n_theta)`.
    pub fn sample(&self, base: &Mesh, n_theta: usize) -> Result<GaugePair> {
        let mesh = loop_mesh(base, n_theta)?;
        let mut conn = MatrixForm::zero(&mesh, 1, self.rank)?;
        for (a, field) in self.conn.iter().enumerate() {
            conn.set_component(&[a], field.sample(&mesh).component_or_zero(0))?;
        }
        GaugePair::from_forms(GroupSpec::unitary(self.rank), conn, self.phi.sample(&mesh))
    }

    /// Pullback along `x -> x + t v` on the base (`v` has one entry per base axis).
    pub fn translated(&self, v: &[f64], t: f64) -> Self {
        let shift = |f: &TrigField| f.translated(v, t);
        TrigPair { rank: self.rank, conn: self.conn.iter().map(shift).collect(), phi: shift(&self.phi) }
    }

    /// `d/dt` of [`TrigPair::translated`] at `t = 0`, as a pair of coefficient fields.
    pub fn directional(&self, v: &[f64]) -> Self {
        let dir = |f: &TrigField| f.directional(v);
        TrigPair { rank: self.rank, conn: self.conn.iter().map(dir).collect(), phi: dir(&self.phi) }
    }

    /// Samples the connection and Higgs parts as plain forms, without validation.
    pub fn sample_forms(&self, base: &Mesh, n_theta: usize) -> Result<(MatrixForm, MatrixForm)> {
        let mesh = loop_mesh(base, n_theta)?;
        let mut conn = MatrixForm::zero(&mesh, 1, self.rank)?;
        for (a, field) in self.conn.iter().enumerate() {
            conn.set_component(&[a], field.sample(&mesh).component_or_zero(0))?;
        }
        Ok((conn, self.phi.sample(&mesh)))
    }
}

/// Random `u(n)` connection and Higgs field, both trigonometric polynomials.
pub fn random_pair(rng: &mut impl Rng, base: &Mesh, shape: PairShape) -> Result<GaugePair> {
    TrigPair::random(rng, base.dim(), shape).sample(base, shape.n_theta)
}

/// A pair built from analytic but not bandlimited functions
/// `X / (c - cos(k . x))`, whose discretization error decays geometrically in the grid size.
pub fn analytic_pair<R: Rng>(rng: &mut R, base: &Mesh, n_theta: usize, rank: usize) -> Result<GaugePair> {
    let mesh = loop_mesh(base, n_theta)?;
    let dim = mesh.dim();
    let field = |rng: &mut R| {
        let terms: Vec<(Vec<f64>, f64, Vec<C64>)> = (0..2)
            .map(|_| {
                let k: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1..=1) as f64).collect();
                (k, rng.gen_range(0.0..2.0 * PI), random_skew(rng, rank, 0.4))
            })
            .collect();
        MatrixForm::function(&mesh, rank, move |x| {
            let mut out = vec![ZERO; rank * rank];
            for (k, phase, m) in &terms {
                let arg: f64 = k.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + phase;
                let s = 1.0 / (2.0 - arg.cos());
                for (o, v) in out.iter_mut().zip(m) {
                    *o += v * s;
                }
            }
            out
        })
    };
    let mut conn = MatrixForm::zero(&mesh, 1, rank)?;
    for a in 0..base.dim() {
        let f = field(rng);
        conn.set_component(&[a], f.component_or_zero(0))?;
    }
    let phi = field(rng);
    GaugePair::from_forms(GroupSpec::unitary(rank), conn, phi)
}

/// Chart `[0,1] x S^1 x S^1` of the 3-sphere through `eta = pi s / 2`,
/// `(z1, z2) = (e^{i xi1} sin eta, e^{i xi2} cos eta)`, and the map to `SU(2)`
/// identifying the sphere with the group.
pub fn sphere_identity_map(n_eta: usize, n_xi: usize) -> Result<GroupMap> {
    let mesh = Arc::new(Mesh::new(vec![
        crate::meshforms::Factor::Interval { n: n_eta },
        crate::meshforms::Factor::Circle { n: n_xi },
        crate::meshforms::Factor::Circle { n: n_xi },
    ])?);
    GroupMap::from_fn(&mesh, GroupSpec::special_unitary(2), |x| {
        let eta = PI * x[0] / 2.0;
        let z1 = C64::from_polar(eta.sin(), x[1]);
        let z2 = C64::from_polar(eta.cos(), x[2]);
        vec![z1, -z2.conj(), z2, z1.conj()]
    })
}

/// A random form of the given degree whose components are trigonometric polynomials.
pub fn random_form(rng: &mut impl Rng, mesh: &Arc<Mesh>, degree: usize, n: usize, band: i32) -> Result<MatrixForm> {
    let dim = mesh.dim();
    let bw = vec![band; dim];
    let mut out = MatrixForm::zero(mesh, degree, n)?;
    for set in subsets_of(dim, degree) {
        let f = TrigField::random(rng, n, &bw, 3, 1.0).sample(mesh);
        out.set_component(&set, f.component_or_zero(0))?;
    }
    Ok(out)
}

fn subsets_of(dim: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << dim)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..dim).filter(|a| m & (1 << a) != 0).collect())
        .collect()
}

/// Homotopy `g_t = a(x) W(t) b(x) W(t)^{-1}` with `a`, `b` bandlimited unitary
/// maps and `W(t) = exp(t eta)` for a constant skew-Hermitian `eta`.
pub fn random_homotopy(rng: &mut impl Rng, mesh: &Arc<Mesh>, n: usize, band: i32) -> Result<HomotopySpec> {
    let bw = vec![band; mesh.dim()];
    let a = UnitaryTrigMap::random(rng, n, &bw, 2).sample(mesh)?.values().clone();
    let b = UnitaryTrigMap::random(rng, n, &bw, 2).sample(mesh)?.values().clone();
    let eta = random_skew(rng, n, 1.0);
    let spec = GroupSpec::unitary(n);
    let e = MatrixForm::constant(mesh, n, &eta);
    let w = move |t: f64| linalg::expm(&linalg::scale(&eta, C64::new(t, 0.0)), n);
    let (a2, b2, w2) = (a.clone(), b.clone(), w.clone());
    let at = move |t: f64| {
        let wt = MatrixForm::constant(b2.mesh(), n, &w2(t));
        GroupMap::new(spec, a2.wedge(&wt)?.wedge(&b2)?.wedge(&wt.adjoint())?)
    };
    // d/dt g_t = a W (eta b - b eta) W^{-1}
    let comm = e.wedge(&b)?.sub(&b.wedge(&e)?)?;
    let velocity = move |t: f64| {
        let wt = MatrixForm::constant(comm.mesh(), n, &w(t));
        a.wedge(&wt)?.wedge(&comm)?.wedge(&wt.adjoint())
    };
    Ok(HomotopySpec::new(at, velocity))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generators_are_reproducible() {
        let a = random_skew(&mut rng(7), 3, 1.0);
        let b = random_skew(&mut rng(7), 3, 1.0);
        assert_eq!(a, b);
        assert!(linalg::skew_defect(&a, 3) == 0.0);
    }

    #[test]
    fn based_loop_winding_matches_construction() {
        let mut r = rng(11);
        for _ in 0..5 {
            let (l, w) = random_based_loop(&mut r, 2, 64, 3, 4).unwrap();
            assert!(l.is_based());
            assert_eq!(l.winding_number().unwrap().value, w);
        }
    }

    #[test]
    fn gauge_is_based_and_unitary() {
        let base = Mesh::torus(&[8, 8]).unwrap();
        let g = random_based_gauge(&mut rng(3), &base, 16, 2, 1).unwrap();
        assert!(g.basedness_defect().unwrap() < 1e-14);
    }

    #[test]
    fn translation_and_directional_derivative_agree() {
        let f = TrigField::random(&mut rng(12), 2, &[2, 1, 3], 4, 1.0);
        let v = [0.7, -1.3];
        let x = [0.4, 2.0, 1.1];
        let h = 1e-6;
        let plus = f.translated(&v, h).eval(&x);
        let minus = f.translated(&v, -h).eval(&x);
        let fd = linalg::scale(&linalg::sub(&plus, &minus), C64::new(0.5 / h, 0.0));
        assert!(linalg::max_abs(&linalg::sub(&fd, &f.directional(&v).eval(&x))) < 1e-8);
        let moved = [x[0] + 0.3 * v[0], x[1] + 0.3 * v[1], x[2]];
        assert!(linalg::max_abs(&linalg::sub(&f.translated(&v, 0.3).eval(&x), &f.eval(&moved))) < 1e-13);
    }

    #[test]
    fn homotopy_velocity_matches_difference_quotient() {
        let mesh = Arc::new(Mesh::torus(&[8, 8]).unwrap());
        let h = random_homotopy(&mut rng(4), &mesh, 2, 1).unwrap();
        let (t, dt) = (0.4, 1e-6);
        let fd = h.at(t + dt).unwrap().values().sub(h.at(t - dt).unwrap().values()).unwrap().scale_real(0.5 / dt);
        assert!(fd.distance(&h.velocity(t).unwrap()).unwrap() < 1e-8);
    }
}
