//! Registry of identity checks with residuals, run as a batch.
//!
//! Every check returns a non-negative residual and passes when the residual
//! is at most its tolerance. Checks that bound a rate from below (convergence
//! orders) report the ratio of successive errors, so that smaller is still better.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients;
use crate::error::{Error, Result};
use crate::gauge::{curvature_of, loop_mesh, GaugePair, GroupMap};
use crate::holonomy::{higgs_holonomy, loop_holonomy, HolonomyOptions, DEFAULT_STEPS};
use crate::invariants::{
    beta_quadrature, chern_character_even, chern_simons_relative, chern_simons_total, chern_weil, circle_distance,
    degree1_character, gerbe_curving, odd_chern_character, string_form, string_potential_relative,
    string_potential_total, total_string_form, total_transgression, transgression_pullback, AffineFormPath,
    CaloronPath, CutoffFunction, FamilyPath, SmoothPath, SymTrace, T_QUAD_NODES,
};
use crate::ktheory::{
    cs_equivalent, homotopy_cs_integral, homotopy_integrand_max, nullhomotopy_construct, EquivalenceSign,
    TwzElement, TOL_EQUIVALENCE,
};
use crate::linalg::{self, C64};
use crate::loopcore::{GroupSpec, SampledLoop};
use crate::meshforms::{GradedForm, MatrixForm, Mesh};
use crate::samples::{
    analytic_pair, random_based_gauge, random_based_loop, random_form, random_homotopy, random_pair, rng,
    sphere_identity_map, PairShape, TrigPair, UnitaryTrigMap,
};

pub const MAX_DIM: usize = 4;
pub const MAX_RANK: usize = 8;
pub const MAX_SAMPLES: usize = 1024;

/// Tolerance overrides: one global value and/or per-check values.
#[derive(Clone, Debug, Default)]
pub struct TolOverrides {
    pub global: Option<f64>,
    pub per_check: BTreeMap<String, f64>,
}

impl TolOverrides {
    /// Parses `VALUE` (global) or `CHECK_ID=VALUE` items.
    pub fn parse(items: &[String]) -> Result<Self> {
        let mut out = TolOverrides::default();
        for item in items {
            let (id, value) = match item.split_once('=') {
                Some((id, v)) => (Some(id.trim()), v.trim()),
                None => (None, item.trim()),
            };
            let v: f64 = value.parse().map_err(|_| Error::Validation(format!("bad tolerance '{item}'")))?;
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("tolerance must be finite and non-negative: '{item}'")));
            }
            match id {
                Some(id) => {
                    out.per_check.insert(id.to_string(), v);
                }
                None => out.global = Some(v),
            }
        }
        Ok(out)
    }

    fn resolve(&self, id: &str, default: f64) -> f64 {
        self.per_check.get(id).copied().or(self.global).unwrap_or(default)
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    /// Run only this scenario; all scenarios when `None`.
    pub scenario: Option<String>,
    /// Circle sizes of the base torus; checks needing more axes reuse them cyclically.
    pub grid: Vec<usize>,
    pub theta_samples: usize,
    pub rank: usize,
    pub seed: u64,
    pub tolerance: TolOverrides,
    /// Highest form degree kept in series outputs.
    pub truncate: Option<usize>,
    pub jobs: usize,
    /// Record wall-clock times; off by default so reports are reproducible byte for byte.
    pub timings: bool,
    pub sign: EquivalenceSign,
    /// A user-supplied pair replacing the first random pair where the base matches.
    pub pair: Option<GaugePair>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: None,
            grid: vec![16, 16],
            theta_samples: 32,
            rank: 2,
            seed: 1,
            tolerance: TolOverrides::default(),
            truncate: None,
            jobs: 0,
            timings: false,
            sign: EquivalenceSign::AsPrinted,
            pair: None,
        }
    }
}

/// Parses `16x16` style grids.
pub fn parse_grid(s: &str) -> Result<Vec<usize>> {
    s.split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Validation(format!("bad grid '{s}'"))))
        .collect()
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() || self.grid.len() > MAX_DIM {
            return Err(Error::Validation(format!("grid must have 1..={MAX_DIM} axes")));
        }
        for &n in self.grid.iter().chain([&self.theta_samples]) {
            if n > MAX_SAMPLES {
                return Err(Error::Validation(format!("{n} samples exceeds {MAX_SAMPLES}")));
            }
        }
        Mesh::torus(&self.grid)?;
        Mesh::circle(self.theta_samples)?;
        if self.rank == 0 || self.rank > MAX_RANK {
            return Err(Error::Validation(format!("rank must be in 1..={MAX_RANK}")));
        }
        if let Some(s) = &self.scenario {
            if !scenarios().contains(&s.as_str()) {
                return Err(Error::Validation(format!("unknown scenario '{s}'")));
            }
        }
        let ids: Vec<&str> = registry().iter().map(|c| c.id).collect();
        for id in self.tolerance.per_check.keys() {
            if !ids.contains(&id.as_str()) {
                return Err(Error::Validation(format!("unknown check id '{id}' in tolerance override")));
            }
        }
        if let Some(p) = &self.pair {
            let base = p.base_mesh()?;
            if base.dim() > MAX_DIM || p.spec().rank > MAX_RANK {
                return Err(Error::Validation("supplied pair exceeds size bounds".into()));
            }
        }
        Ok(())
    }
}

/// One registered identity check.
pub struct Check {
    pub id: &'static str,
    pub scenario: &'static str,
    /// What the check verifies, in words.
    pub reference: &'static str,
    pub tolerance: f64,
    run: fn(&Ctx) -> Result<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub paper_ref: String,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub wall_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(transparent)]
pub struct Report {
    pub records: Vec<CheckRecord>,
}

impl Report {
    /// A one-record report for input that failed validation before any check ran.
    pub fn validation_failure(message: impl Into<String>) -> Report {
        Report {
            records: vec![CheckRecord {
                check_id: "input.validation".into(),
                paper_ref: "supplied input satisfies its type invariants".into(),
                residual: None,
                tolerance: 0.0,
                pass: false,
                wall_ms: 0,
                error: Some(message.into()),
            }],
        }
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check_id", "paper_ref", "residual", "tolerance", "pass", "wall_ms", "error"])
            .map_err(csv_err)?;
        for r in &self.records {
            w.write_record([
                r.check_id.clone(),
                r.paper_ref.clone(),
                r.residual.map_or(String::new(), |v| format!("{v:e}")),
                format!("{:e}", r.tolerance),
                r.pass.to_string(),
                r.wall_ms.to_string(),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Validation(e.to_string())
}

/// Scenario ids in registry order.
pub fn scenarios() -> Vec<&'static str> {
    let mut out: Vec<&'static str> = Vec::new();
    for c in registry() {
        if !out.contains(&c.scenario) {
            out.push(c.scenario);
        }
    }
    out
}

pub fn run_suite(cfg: &ScenarioConfig) -> Result<Report> {
    cfg.validate()?;
    let checks: Vec<Check> =
        registry().into_iter().filter(|c| cfg.scenario.as_deref().map_or(true, |s| s == c.scenario)).collect();
    let ctx = Ctx { cfg };
    let run = || checks.par_iter().map(|c| run_one(c, &ctx)).collect::<Vec<_>>();
    let mut records = if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Validation(e.to_string()))?
            .install(run)
    } else {
        run()
    };
    records.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    Ok(Report { records })
}

fn run_one(c: &Check, ctx: &Ctx) -> CheckRecord {
    let tolerance = ctx.cfg.tolerance.resolve(c.id, c.tolerance);
    let start = Instant::now();
    let outcome = (c.run)(ctx);
    let wall_ms = if ctx.cfg.timings { start.elapsed().as_millis() as u64 } else { 0 };
    let (residual, error) = match outcome {
        Ok(r) if r.is_nan() => (None, Some("residual is NaN".to_string())),
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    CheckRecord {
        check_id: c.id.to_string(),
        paper_ref: c.reference.to_string(),
        residual,
        tolerance,
        pass: residual.is_some_and(|r| r <= tolerance),
        wall_ms,
        error,
    }
}

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
}

impl Ctx<'_> {
    /// A generator seeded from the run seed and the check id, independent of scheduling.
    fn rng(&self, id: &str) -> ChaCha8Rng {
        let h = id.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
        rng(self.cfg.seed ^ h)
    }

    fn n(&self) -> usize {
        self.cfg.rank
    }

    fn theta(&self) -> usize {
        self.cfg.theta_samples
    }

    fn torus(&self, dim: usize) -> Result<Mesh> {
        let g = &self.cfg.grid;
        Mesh::torus(&(0..dim).map(|i| g[i % g.len()]).collect::<Vec<_>>())
    }

    fn torus_scaled(&self, dim: usize, factor: usize) -> Result<Mesh> {
        let g = &self.cfg.grid;
        Mesh::torus(&(0..dim).map(|i| g[i % g.len()] * factor).collect::<Vec<_>>())
    }

    fn arc_torus(&self, dim: usize) -> Result<Arc<Mesh>> {
        Ok(Arc::new(self.torus(dim)?))
    }

    fn shape(&self) -> PairShape {
        PairShape { rank: self.n(), n_theta: self.theta(), ..Default::default() }
    }

    /// Pair shape on bases of dimension `dim`; higher-dimensional bases get
    /// fewer loop samples to stay at desk scale.
    fn shape_for(&self, dim: usize) -> PairShape {
        if dim <= 2 {
            self.shape()
        } else {
            PairShape { n_theta: self.theta().min(16), ..self.shape() }
        }
    }

    /// The supplied pair when its base is `base`, otherwise a random one.
    fn first_pair(&self, rng: &mut ChaCha8Rng, base: &Mesh) -> Result<GaugePair> {
        if let Some(p) = &self.cfg.pair {
            if p.base_mesh()?.factors() == base.factors() {
                return Ok(p.clone());
            }
        }
        random_pair(rng, base, self.shape_for(base.dim()))
    }

    fn truncate(&self) -> Option<usize> {
        self.cfg.truncate
    }

    fn degrees(&self, base_dim: usize) -> Vec<usize> {
        let top = self.truncate().unwrap_or(usize::MAX).min(2 * base_dim + 1);
        (1..=2).filter(|k| 2 * k - 1 <= top).collect()
    }
}

fn f(k: usize) -> SymTrace {
    SymTrace::new(k).expect("degree within range")
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Every registered check.
pub fn registry() -> Vec<Check> {
    macro_rules! check {
        ($id:literal, $scenario:literal, $tol:expr, $reference:literal, $run:expr) => {
            Check { id: $id, scenario: $scenario, reference: $reference, tolerance: $tol, run: $run }
        };
    }
    vec![
        check!("loops.winding-integrality", "loops", 1e-9, "winding number of a based unitary loop is an integer", loops_integrality),
        check!("loops.winding-additivity", "loops", 0.0, "winding number is additive under products and block sums", loops_additivity),
        check!("loops.log-derivative-skew", "loops", 1e-10, "log-derivative of a unitary loop is skew-Hermitian", loops_skew),
        check!("loops.winding-convergence", "loops", 0.25, "winding quadrature error ratio under doubling for an analytic loop", loops_convergence),
        check!("coefficients.beta-identity", "coefficients", 0.0, "alternating binomial sum equals B(k,k), exact", coeff_beta),
        check!("coefficients.series-tables", "coefficients", 0.0, "potential, Chern-Simons, transgression and character coefficients, exact", coeff_tables),
        check!("coefficients.float-agreement", "coefficients", 1e-14, "floating coefficient tables agree with the exact ones", coeff_float),
        check!("coefficients.cutoff-linear", "coefficients", 1e-8, "cutoff integral equals B(k,k) for the linear cutoff", cutoff_linear),
        check!("coefficients.cutoff-cosine", "coefficients", 1e-8, "cutoff integral equals B(k,k) for the cosine cutoff", cutoff_cosine),
        check!("caloron.curvature-identity", "caloron", 1e-10, "curvature of A + Phi dtheta is F + nabla Phi ^ dtheta", caloron_curvature),
        check!("caloron.round-trip", "caloron", 0.0, "caloron transform and its inverse are mutually inverse", caloron_round_trip),
        check!("caloron.gauge-covariance", "caloron", 1e-9, "curvature and nabla Phi transform by the adjoint action", caloron_covariance),
        check!("caloron.higgs-convex", "caloron", 1e-10, "convex combinations of Higgs fields stay skew-Hermitian", caloron_convex),
        check!("string.factorization", "string", 1e-9, "string form and relative potential are fiber integrals of Chern-Weil and Chern-Simons forms", string_factorization),
        check!("string.descends", "string", 1e-8, "d of the relative potential is the difference of string forms", string_descends),
        check!("string.descends-convergence", "string", 0.25, "relative potential identity error ratio under doubling for analytic data", string_descends_convergence),
        check!("string.same-endpoint", "string", 1e-8, "relative potentials of paths with equal endpoints differ by a form with zero periods", string_same_endpoint),
        check!("string.total-primitive", "string", 1e-8, "d of the total string potential is the string form", string_total_primitive),
        check!("string.total-series", "string", 1e-10, "total string form collects the string forms of all degrees", string_total_series),
        check!("string.gerbe-curving", "string", 1e-10, "degree-2 total potential equals the gerbe curving up to an exact form", string_gerbe),
        check!("string.homotopy-formula", "string", 1e-8, "potential of a translation family is the integrated contraction of the string form", string_homotopy),
        check!("string.closed", "string", 1e-8, "string forms are closed", string_closed),
        check!("chern.weil-closed", "chern", 1e-8, "Chern-Weil forms are closed", chern_closed),
        check!("chern.simons-primitive", "chern", 1e-8, "d of the Chern-Simons form is the Chern-Weil form", chern_primitive),
        check!("chern.simons-relative", "chern", 1e-10, "relative Chern-Simons form from zero equals the total one", chern_relative),
        check!("chern.even-character", "chern", 1e-8, "even Chern character is closed and additive", chern_even),
        check!("chern.odd-winding", "chern", 1e-9, "odd Chern character of a phase loop integrates to its winding", chern_odd_winding),
        check!("chern.sphere-degree", "chern", 1e-5, "odd Chern character of the identity of SU(2) integrates to a unit", chern_sphere),
        check!("chern.odd-additivity", "chern", 1e-10, "odd Chern character is additive and odd under inversion", chern_odd_additive),
        check!("chern.odd-integral-periods", "chern", 1e-6, "odd Chern character is closed with integral periods", chern_integral_periods),
        check!("chern.transgression-sum", "chern", 1e-10, "odd Chern character equals the sum of pulled-back transgression forms", chern_transgression_sum),
        check!("chern.flat-path", "chern", 1e-9, "Chern-Simons form along d + t g*Theta is the pulled-back transgression form", chern_flat_path),
        check!("holonomy.pure-gauge", "holonomy", 1e-7, "holonomy of a pure-gauge Higgs field is the identity", hol_pure_gauge),
        check!("holonomy.order", "holonomy", 0.0769, "integrator error ratio under step doubling (2^-3.7 bound)", hol_order),
        check!("holonomy.gauge-invariance", "holonomy", 1e-7, "holonomy is invariant under based gauge transformations", hol_gauge),
        check!("holonomy.unitarity", "holonomy", 1e-8, "holonomy of a skew-Hermitian Higgs field is unitary", hol_unitarity),
        check!("holonomy.string-periods-circle", "holonomy", 1e-6, "string form and pulled-back transgression form have equal periods on a circle base", hol_periods_circle),
        check!("holonomy.string-periods-torus", "holonomy", 1e-6, "string form and pulled-back transgression form have equal periods on a torus base", hol_periods_torus),
        check!("ktheory.nullhomotopy-integrand", "ktheory", 1e-10, "homotopy integrand vanishes along the rotation nullhomotopy", kt_integrand),
        check!("ktheory.nullhomotopy-integral", "ktheory", 1e-10, "homotopy integral of the rotation nullhomotopy is zero", kt_integral),
        check!("ktheory.curvature-primitive", "ktheory", 1e-8, "d of the homotopy integral is the difference of odd Chern characters", kt_primitive),
        check!("ktheory.group-laws", "ktheory", 1e-10, "curvature is additive, odd under inversion and invariant under block swap", kt_group_laws),
        check!("ktheory.inverse-equivalence", "ktheory", TOL_EQUIVALENCE, "g + g^-1 is equivalent to the identity through the rotation nullhomotopy", kt_equivalence),
        check!("character.gauge-invariance", "character", 1e-9, "degree-1 character is invariant mod Z under based gauge transformations", char_gauge),
        check!("character.constants", "character", 1e-12, "degree-1 character of constant Higgs fields and the half-integer convention", char_constants),
        check!("fiber.d-commutes", "fiber", 1e-10, "fiber integration over a circle commutes with d", fiber_d_commutes),
        check!("fiber.fubini", "fiber", 1e-10, "integrating over the fiber first gives the total integral", fiber_fubini),
        check!("fiber.slice-naturality", "fiber", 1e-10, "fiber integration commutes with restriction to slices", fiber_slices),
        check!("fiber.d-squared", "fiber", 1e-10, "d squares to zero on periodic data", fiber_d_squared),
        check!("fiber.stokes", "fiber", 1e-10, "integral of an exact top form over a torus vanishes", fiber_stokes),
    ]
}

// ---- loops

const LOOP_SAMPLES: usize = 128;

fn loop_len(c: &Ctx) -> usize {
    LOOP_SAMPLES.max(c.theta())
}

fn loops_integrality(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("loops.winding-integrality");
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (l, k) = random_based_loop(&mut rng, c.n(), loop_len(c), 4, 4)?;
        let w = l.winding_number()?;
        if w.value != k {
            return Ok(f64::INFINITY);
        }
        worst = worst.max(w.distance);
    }
    Ok(worst)
}

fn loops_additivity(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("loops.winding-additivity");
    let mut worst = 0i64;
    for _ in 0..50 {
        let (a, ka) = random_based_loop(&mut rng, c.n(), loop_len(c), 3, 3)?;
        let (b, kb) = random_based_loop(&mut rng, c.n(), loop_len(c), 3, 3)?;
        let prod = a.pointwise_product(&b)?.winding_number()?.value;
        let sum = a.block_sum(&b)?.winding_number()?.value;
        worst = worst.max((prod - ka - kb).abs()).max((sum - ka - kb).abs());
    }
    Ok(worst as f64)
}

fn loops_skew(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("loops.log-derivative-skew");
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (l, _) = random_based_loop(&mut rng, c.n(), loop_len(c), 4, 4)?;
        worst = worst.max(l.log_derivative()?.skew_defect());
    }
    Ok(worst)
}

/// `diag(b, 1, ..)` with the Blaschke factor `b = (z - a)/(1 - a z)`: analytic, winding 1.
fn blaschke_loop(n: usize, len: usize) -> Result<SampledLoop> {
    let a = 0.5;
    SampledLoop::group_from_fn(GroupSpec::unitary(n), len, |t| {
        let z = C64::from_polar(1.0, t);
        let mut m = linalg::identity(n);
        m[0] = (z - a) / (1.0 - a * z);
        m
    })
}

fn loops_convergence(c: &Ctx) -> Result<f64> {
    let err = |len| -> Result<f64> { Ok((blaschke_loop(c.n(), len)?.winding_number_with_tol(1.0)?.raw - 1.0).abs()) };
    Ok(err(16)? / err(8)?)
}

// ---- coefficients

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

/// `B(k, k)` by the recurrence `B(k,k) = B(k-1,k-1) (k-1)^2 / ((2k-1)(2k-2))`.
fn beta_recurrence(k: usize) -> BigRational {
    (2..=k).fold(q(1, 1), |b, j| {
        let j = j as i64;
        b * q((j - 1) * (j - 1), (2 * j - 1) * (2 * j - 2))
    })
}

fn coeff_beta(_: &Ctx) -> Result<f64> {
    let mut bad = 0;
    for k in 1..=10 {
        let b = beta_recurrence(k);
        if coefficients::beta_alternating_sum(k)? != b || coefficients::beta_kk(k)? != b {
            bad += 1;
        }
    }
    Ok(bad as f64)
}

fn coeff_tables(_: &Ctx) -> Result<f64> {
    let mut bad = 0;
    let mut expect = |ok: bool| {
        if !ok {
            bad += 1
        }
    };
    for k in 1..=10usize {
        // c_0 = 1 and c_{i+1}/c_i = -(k-1-i) / (2(k+1+i))
        let mut c = q(1, 1);
        for i in 0..k {
            expect(coefficients::series_coefficient(k, i)? == c);
            c *= q(-((k - 1 - i) as i64), 2 * (k + 1 + i) as i64);
        }
        let b = beta_recurrence(k);
        let sign = if k % 2 == 1 { q(1, 1) } else { q(-1, 1) };
        let half = (1..k).fold(q(1, 1), |h, _| h * q(1, 2));
        let kk = k as i64;
        expect(coefficients::transgression_prefactor(k)? == &sign * &half * q(kk, 1) * &b);
        expect(coefficients::loop_generator_coefficient(k)? == &sign * &half * q(kk * (2 * kk - 1), 1) * &b);
    }
    // -j!/(2j+1)! and -j!/(2j)! by their own recurrences
    let (mut odd, mut even) = (q(-1, 1), q(-1, 1));
    for j in 0..=10usize {
        expect(coefficients::odd_chern_rational(j) == odd);
        expect(coefficients::homotopy_rational(j) == even);
        let jj = j as i64 + 1;
        odd *= q(jj, (2 * jj) * (2 * jj + 1));
        even *= q(jj, (2 * jj - 1) * (2 * jj));
    }
    expect(coefficients::transgression_prefactor(2)? == q(-1, 6));
    Ok(bad as f64)
}

fn coeff_float(_: &Ctx) -> Result<f64> {
    coefficients::check_float_agreement(10)
}

fn cutoff(alpha: CutoffFunction) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 1..=10 {
        worst = worst.max(beta_quadrature(k, &alpha, 64)?.1);
    }
    Ok(worst)
}

fn cutoff_linear(_: &Ctx) -> Result<f64> {
    cutoff(CutoffFunction::linear())
}

fn cutoff_cosine(_: &Ctx) -> Result<f64> {
    cutoff(CutoffFunction::cosine())
}

// ---- caloron

const CURVATURE_THETA: usize = 64;

fn caloron_curvature(c: &Ctx) -> Result<f64> {
    let base = c.torus(2)?;
    let mut rng = c.rng("caloron.curvature-identity");
    let p = match &c.cfg.pair {
        Some(p) if p.base_mesh()?.factors() == base.factors() => p.clone(),
        _ => random_pair(&mut rng, &base, PairShape { n_theta: CURVATURE_THETA.max(c.theta()), ..c.shape() })?,
    };
    let full = curvature_of(&p.caloron_transform()?)?;
    let dth = MatrixForm::coordinate_differential(p.mesh(), p.loop_axis())?;
    let split = p.connection().curvature()?.add(&p.higgs_cov_derivative()?.wedge(&dth)?)?;
    full.distance(&split)
}

fn caloron_round_trip(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("caloron.round-trip");
    let p = c.first_pair(&mut rng, &c.torus(2)?)?;
    let a = p.caloron_transform()?;
    let back = GaugePair::inverse_caloron_transform(p.spec(), &a)?;
    Ok(back.distance(&p)?.max(back.caloron_transform()?.distance(&a)?))
}

fn caloron_covariance(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("caloron.gauge-covariance");
    let base = c.torus(2)?;
    let p = c.first_pair(&mut rng, &base)?;
    let gamma = random_based_gauge(&mut rng, &base, p.theta_samples(), p.spec().rank, 1)?;
    let (q, _) = p.gauge_transform(&gamma)?;
    let g = gamma.values();
    let gi = gamma.inverse()?;
    let gi = gi.values();
    let ad = |x: &MatrixForm| -> Result<MatrixForm> { gi.wedge(x)?.wedge(g) };
    let curv = q.connection().curvature()?.distance(&ad(&p.connection().curvature()?)?)?;
    let nabla = q.higgs_cov_derivative()?.distance(&ad(&p.higgs_cov_derivative()?)?)?;
    let based = if p.connection().is_based()? == q.connection().is_based()? { 0.0 } else { f64::INFINITY };
    Ok(max_of([curv, nabla, based]))
}

fn caloron_convex(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("caloron.higgs-convex");
    let base = c.torus(2)?;
    let p0 = random_pair(&mut rng, &base, c.shape())?;
    let p1 = random_pair(&mut rng, &base, c.shape())?;
    let mut worst: f64 = 0.0;
    for s in [0.0, 0.3, 0.5, 1.0] {
        worst = worst.max(p0.higgs().convex_combination(p1.higgs(), s)?.field().skew_defect());
    }
    Ok(worst)
}

// ---- string forms

fn two_pairs(c: &Ctx, id: &str, base_dim: usize) -> Result<(GaugePair, GaugePair)> {
    let mut rng = c.rng(id);
    let base = c.torus(base_dim)?;
    Ok((c.first_pair(&mut rng, &base)?, random_pair(&mut rng, &base, c.shape_for(base_dim))?))
}

fn string_factorization(c: &Ctx) -> Result<f64> {
    let base = c.torus(2)?;
    let mut rng = c.rng("string.factorization");
    let shape = PairShape { n_theta: CURVATURE_THETA.max(c.theta()), ..c.shape() };
    let p0 = random_pair(&mut rng, &base, shape)?;
    let p1 = random_pair(&mut rng, &base, shape)?;
    let path = SmoothPath::affine(&p0, &p1)?;
    let axis = p0.loop_axis();
    let cal = p0.caloron_transform()?;
    let mut worst: f64 = 0.0;
    for k in [1, 2] {
        let s = string_form(f(k), &p0)?;
        worst = worst.max(s.distance(&chern_weil(f(k), &cal)?.fiber_integrate(axis)?)?);
        let pot = string_potential_relative(f(k), &path, T_QUAD_NODES)?;
        let cs = chern_simons_relative(f(k), &CaloronPath::new(&path), T_QUAD_NODES)?.fiber_integrate(axis)?;
        worst = worst.max(pot.distance(&cs)?);
    }
    Ok(worst)
}

fn descends_residual(k: usize, p0: &GaugePair, p1: &GaugePair) -> Result<f64> {
    let path = SmoothPath::affine(p0, p1)?;
    let ds = string_potential_relative(f(k), &path, T_QUAD_NODES)?.d();
    let diff = string_form(f(k), p1)?.sub(&string_form(f(k), p0)?)?;
    ds.distance(&diff)
}

fn string_descends(c: &Ctx) -> Result<f64> {
    let (p0, p1) = two_pairs(c, "string.descends", 2)?;
    let mut worst = descends_residual(1, &p0, &p1)?;
    // the degree-2 identity is only non-trivial on a three-dimensional base
    let (q0, q1) = two_pairs(c, "string.descends.3", 3)?;
    worst = worst.max(descends_residual(2, &q0, &q1)?);
    Ok(worst)
}

fn string_descends_convergence(c: &Ctx) -> Result<f64> {
    let residual = |scale: usize| -> Result<f64> {
        let base = Mesh::torus(&[8 * scale; 3])?;
        let mut rng = c.rng("string.descends-convergence");
        let p0 = analytic_pair(&mut rng, &base, 8 * scale, c.n())?;
        let p1 = analytic_pair(&mut rng, &base, 8 * scale, c.n())?;
        descends_residual(2, &p0, &p1)
    };
    Ok(residual(2)? / residual(1)?)
}

fn string_same_endpoint(c: &Ctx) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for dim in [2] {
        let mut rng = c.rng(&format!("string.same-endpoint.{dim}"));
        let base = c.torus(dim)?;
        let p0 = c.first_pair(&mut rng, &base)?;
        let p1 = random_pair(&mut rng, &base, c.shape_for(dim))?;
        let off = random_pair(&mut rng, &base, c.shape_for(dim))?;
        let knot = p0.affine(&p1, 0.35)?.affine(&off, 0.5)?;
        let straight = SmoothPath::affine(&p0, &p1)?;
        let bent = SmoothPath::cubic(&[(0.0, p0.clone()), (0.35, knot), (1.0, p1.clone())])?;
        for k in [1, 2] {
            let d = string_potential_relative(f(k), &bent, T_QUAD_NODES)?
                .sub(&string_potential_relative(f(k), &straight, T_QUAD_NODES)?)?;
            worst = worst.max(d.max_period()?);
        }
    }
    Ok(worst)
}

fn string_total_primitive(c: &Ctx) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        let mut rng = c.rng(&format!("string.total-primitive.{dim}"));
        let p = c.first_pair(&mut rng, &c.torus(dim)?)?;
        for k in [1, 2] {
            let ds = string_potential_total(f(k), &p)?.d();
            worst = worst.max(ds.distance(&string_form(f(k), &p)?)?);
        }
    }
    Ok(worst)
}

fn string_total_series(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("string.total-series");
    let p = c.first_pair(&mut rng, &c.torus(3)?)?;
    let total = total_string_form(&p, c.truncate())?;
    let mut worst: f64 = 0.0;
    for k in c.degrees(3) {
        let part = total.part(2 * k - 1).ok_or_else(|| Error::Validation(format!("missing degree {}", 2 * k - 1)))?;
        worst = worst.max(part.distance(&string_form(f(k), &p)?)?);
    }
    Ok(worst)
}

fn string_gerbe(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("string.gerbe-curving");
    let p = c.first_pair(&mut rng, &c.torus(2)?)?;
    let exact = f(2).evaluate(&[p.connection().form(), p.higgs().field()])?.integrate_along(p.loop_axis())?.d();
    string_potential_total(f(2), &p)?.distance(&gerbe_curving(&p)?.sub(&exact)?)
}

fn string_homotopy(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("string.homotopy-formula");
    let base = c.torus(2)?;
    let pair = TrigPair::random(&mut rng, 2, c.shape());
    let v = [0.8, -0.45];
    let theta = c.theta();
    let path = FamilyPath::new(
        |t| pair.translated(&v, t).sample(&base, theta),
        |t| pair.translated(&v, t).directional(&v).sample_forms(&base, theta),
    );
    let mut worst: f64 = 0.0;
    for k in [1, 2] {
        let pot = string_potential_relative(f(k), &path, T_QUAD_NODES)?;
        let mut contracted: Option<MatrixForm> = None;
        for (t, w) in crate::invariants::t_rule(&[0.0, 1.0], T_QUAD_NODES) {
            let term = string_form(f(k), &pair.translated(&v, t).sample(&base, theta)?)?.contract(&v)?.scale_real(w);
            contracted = Some(match contracted {
                None => term,
                Some(acc) => acc.add(&term)?,
            });
        }
        let diff = pot.sub(&contracted.expect("nodes"))?;
        worst = worst.max(diff.max_period()?);
    }
    Ok(worst)
}

fn string_closed(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("string.closed");
    let p = c.first_pair(&mut rng, &c.torus(2)?)?;
    let q = random_pair(&mut rng, &Mesh::torus(&[8; 4])?, PairShape { n_theta: 16, ..c.shape() })?;
    Ok(string_form(f(1), &p)?.d().max_abs().max(string_form(f(2), &q)?.d().max_abs()))
}

// ---- Chern forms

fn random_connection(c: &Ctx, id: &str, dim: usize) -> Result<MatrixForm> {
    let mut rng = c.rng(id);
    let mesh = c.arc_torus(dim)?;
    let a = random_form(&mut rng, &mesh, 1, c.n(), 1)?;
    // skew-Hermitian part
    Ok(a.sub(&a.adjoint())?.scale_real(0.5))
}

fn chern_closed(c: &Ctx) -> Result<f64> {
    let a = random_connection(c, "chern.weil-closed", 3)?;
    let b = random_connection(c, "chern.weil-closed.5", 4)?;
    Ok(chern_weil(f(1), &a)?.d().max_abs().max(chern_weil(f(1), &b)?.d().max_abs()))
}

fn chern_primitive(c: &Ctx) -> Result<f64> {
    let a = random_connection(c, "chern.simons-primitive", 4)?;
    let mut worst: f64 = 0.0;
    for k in [1, 2] {
        worst = worst.max(chern_simons_total(f(k), &a)?.d().distance(&chern_weil(f(k), &a)?)?);
    }
    Ok(worst)
}

fn chern_relative(c: &Ctx) -> Result<f64> {
    let a = random_connection(c, "chern.simons-relative", 3)?;
    let zero = MatrixForm::zero(a.mesh(), 1, a.rank())?;
    let path = AffineFormPath::new(zero, a.clone())?;
    let mut worst: f64 = 0.0;
    for k in [1, 2] {
        worst = worst.max(chern_simons_relative(f(k), &path, T_QUAD_NODES)?.distance(&chern_simons_total(f(k), &a)?)?);
    }
    Ok(worst)
}

fn chern_even(c: &Ctx) -> Result<f64> {
    let a = random_connection(c, "chern.even-character", 4)?;
    let b = random_connection(c, "chern.even-character.b", 4)?;
    let ca = chern_character_even(&a, c.truncate())?;
    let cb = chern_character_even(&b, c.truncate())?;
    let cab = chern_character_even(&a.block_sum(&b)?, c.truncate())?;
    if ca.degrees().iter().any(|d| d % 2 == 1) {
        return Ok(f64::INFINITY);
    }
    Ok(ca.d()?.max_abs().max(cab.distance(&ca.add(&cb)?)?))
}

fn chern_odd_winding(c: &Ctx) -> Result<f64> {
    let mesh = Arc::new(Mesh::circle(c.theta())?);
    let mut worst: f64 = 0.0;
    for k in -3i32..=3 {
        let g = GroupMap::from_fn(&mesh, GroupSpec::unitary(1), |x| vec![C64::from_polar(1.0, k as f64 * x[0])])?;
        let ch = odd_chern_character(&g, c.truncate())?;
        let v = ch.part(1).map_or(Ok(C64::new(0.0, 0.0)), |p| p.integrate_top_scalar())?;
        worst = worst.max((v - C64::new(k as f64, 0.0)).norm());
    }
    Ok(worst)
}

fn sphere_degree(n_eta: usize, n_xi: usize) -> Result<f64> {
    let g = sphere_identity_map(n_eta, n_xi)?;
    let ch = odd_chern_character(&g, None)?;
    let v = ch.part(3).ok_or_else(|| Error::Validation("no degree-3 part".into()))?.integrate_top_scalar()?;
    Ok(v.re + v.im.abs())
}

fn chern_sphere(c: &Ctx) -> Result<f64> {
    let n_xi = c.cfg.grid[0].max(16);
    let coarse = sphere_degree(32, n_xi)?;
    let fine = sphere_degree(64, 2 * n_xi)?;
    let unit = coarse.round();
    if unit.abs() != 1.0 || fine.round() != unit {
        return Ok(f64::INFINITY);
    }
    Ok((coarse - unit).abs().max((fine - unit).abs()))
}

fn random_map(rng: &mut ChaCha8Rng, mesh: &Arc<Mesh>, n: usize) -> Result<GroupMap> {
    UnitaryTrigMap::random(rng, n, &vec![1; mesh.dim()], 2).sample(mesh)
}

fn chern_odd_additive(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("chern.odd-additivity");
    let mesh = c.arc_torus(3)?;
    let g = random_map(&mut rng, &mesh, c.n())?;
    let h = random_map(&mut rng, &mesh, c.n())?;
    let ch = |m: &GroupMap| odd_chern_character(m, c.truncate());
    let sum = ch(&g.block_sum(&h)?)?.distance(&ch(&g)?.add(&ch(&h)?)?)?;
    let inv = ch(&g.inverse()?)?.add(&ch(&g)?)?.max_abs();
    Ok(sum.max(inv))
}

fn chern_integral_periods(c: &Ctx) -> Result<f64> {
    let mesh = c.arc_torus(2)?;
    let mut rng = c.rng("chern.odd-integral-periods");
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        // a phase with windings in both directions times a random based map
        let (a, b) = (rand::Rng::gen_range(&mut rng, -2..=2) as f64, rand::Rng::gen_range(&mut rng, -2..=2) as f64);
        let u = UnitaryTrigMap::random(&mut rng, c.n(), &[1, 1], 2);
        let g = GroupMap::from_fn(&mesh, GroupSpec::unitary(c.n()), |x| {
            let mut m = u.eval(x);
            let ph = C64::from_polar(1.0, a * x[0] + b * x[1]);
            for v in m.iter_mut().take(c.n()) {
                *v *= ph;
            }
            m
        })?;
        let ch = odd_chern_character(&g, c.truncate())?;
        worst = worst.max(ch.d()?.max_abs());
        if let Some(one) = ch.part(1) {
            for (_, vals) in one.periods()? {
                for v in vals {
                    worst = worst.max((v.re - v.re.round()).abs() + v.im.abs());
                }
            }
        }
    }
    Ok(worst)
}

fn chern_transgression_sum(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("chern.transgression-sum");
    let g = random_map(&mut rng, &c.arc_torus(3)?, c.n())?;
    odd_chern_character(&g, c.truncate())?.distance(&total_transgression(&g, c.truncate())?)
}

fn chern_flat_path(c: &Ctx) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        let mut rng = c.rng(&format!("chern.flat-path.{dim}"));
        let g = random_map(&mut rng, &c.arc_torus(dim)?, c.n())?;
        let theta = g.mc_pullback(crate::gauge::Side::Left)?;
        let path = AffineFormPath::new(MatrixForm::zero(g.mesh(), 1, c.n())?, theta)?;
        for k in c.degrees(dim) {
            let cs = chern_simons_relative(f(k), &path, T_QUAD_NODES)?;
            worst = worst.max(cs.distance(&transgression_pullback(f(k), &g)?)?);
        }
    }
    Ok(worst)
}

// ---- holonomy

fn hol_pure_gauge(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("holonomy.pure-gauge");
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (g, _) = random_based_loop(&mut rng, c.n(), 2 * c.theta(), 3, 2)?;
        let h = loop_holonomy(&g.log_derivative()?, HolonomyOptions { steps: 4 * DEFAULT_STEPS, ..Default::default() })?;
        worst = worst.max(linalg::identity_defect(&h.endpoint, c.n()));
    }
    Ok(worst)
}

fn hol_order(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("holonomy.order");
    let a = crate::samples::random_skew(&mut rng, c.n(), 1.5);
    let b = crate::samples::random_skew(&mut rng, c.n(), 1.5);
    let phi = SampledLoop::algebra_from_fn(GroupSpec::unitary(c.n()), c.theta(), |t| {
        linalg::add(&linalg::scale(&a, C64::new(t.cos(), 0.0)), &linalg::scale(&b, C64::new((2.0 * t).sin(), 0.0)))
    })?;
    let end = |steps| -> Result<Vec<C64>> {
        Ok(loop_holonomy(&phi, HolonomyOptions { steps, error_limit: f64::INFINITY, ..Default::default() })?.endpoint)
    };
    let (h1, h2, h4) = (end(64)?, end(128)?, end(256)?);
    let e1 = linalg::max_abs(&linalg::sub(&h1, &h2));
    let e2 = linalg::max_abs(&linalg::sub(&h2, &h4));
    Ok(e2 / e1)
}

fn hol_gauge(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("holonomy.gauge-invariance");
    let base = c.torus(2)?;
    let p = c.first_pair(&mut rng, &base)?;
    let gamma = random_based_gauge(&mut rng, &base, p.theta_samples(), p.spec().rank, 1)?;
    let (q, _) = p.gauge_transform(&gamma)?;
    let opts = HolonomyOptions::default();
    higgs_holonomy(p.higgs(), opts)?.holonomy.values().distance(higgs_holonomy(q.higgs(), opts)?.holonomy.values())
}

fn hol_unitarity(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("holonomy.unitarity");
    let p = c.first_pair(&mut rng, &c.torus(2)?)?;
    Ok(higgs_holonomy(p.higgs(), HolonomyOptions::default())?.unitarity_defect())
}

fn hol_periods(c: &Ctx, id: &str, dim: usize) -> Result<f64> {
    let mut rng = c.rng(id);
    let base = c.torus_scaled(dim, 2)?;
    let shape = PairShape { base_band: 1, theta_band: 1, modes: 2, scale: 0.3, ..c.shape() };
    let p = random_pair(&mut rng, &base, shape)?;
    let hol = higgs_holonomy(p.higgs(), HolonomyOptions::default())?;
    let tau = transgression_pullback(f(1), &hol.holonomy)?;
    tau.sub(&string_form(f(1), &p)?)?.max_period()
}

fn hol_periods_circle(c: &Ctx) -> Result<f64> {
    hol_periods(c, "holonomy.string-periods-circle", 1)
}

fn hol_periods_torus(c: &Ctx) -> Result<f64> {
    hol_periods(c, "holonomy.string-periods-torus", 2)
}

// ---- K-theory

fn nullhomotopy_maps(c: &Ctx, id: &str) -> Result<Vec<GroupMap>> {
    let mut rng = c.rng(id);
    let mut out = Vec::new();
    for dim in [1, 2] {
        let mesh = c.arc_torus(dim)?;
        for _ in 0..20 {
            out.push(random_map(&mut rng, &mesh, c.n())?);
        }
    }
    Ok(out)
}

fn kt_integrand(c: &Ctx) -> Result<f64> {
    let maps = nullhomotopy_maps(c, "ktheory.nullhomotopy")?;
    let worst: Result<Vec<f64>> = maps
        .iter()
        .map(|g| Ok(max_of(homotopy_integrand_max(&nullhomotopy_construct(g)?, c.truncate())?)))
        .collect();
    Ok(max_of(worst?))
}

fn kt_integral(c: &Ctx) -> Result<f64> {
    let maps = nullhomotopy_maps(c, "ktheory.nullhomotopy")?;
    let worst: Result<Vec<f64>> =
        maps.iter().map(|g| Ok(homotopy_cs_integral(&nullhomotopy_construct(g)?, c.truncate())?.max_abs())).collect();
    Ok(max_of(worst?))
}

fn kt_primitive(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("ktheory.curvature-primitive");
    let mesh = Arc::new(c.torus_scaled(2, 2)?);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let h = random_homotopy(&mut rng, &mesh, c.n(), 1)?;
        let cs = homotopy_cs_integral(&h, c.truncate())?;
        let diff = odd_chern_character(&h.at(1.0)?, c.truncate())?.sub(&odd_chern_character(&h.at(0.0)?, c.truncate())?)?;
        worst = worst.max(cs.d()?.distance(&diff)?);
    }
    Ok(worst)
}

fn kt_element(rng: &mut ChaCha8Rng, mesh: &Arc<Mesh>, n: usize) -> Result<TwzElement> {
    let g = random_map(rng, mesh, n)?;
    let (a, b) = (rand::Rng::gen_range(&mut *rng, -1.0..1.0), rand::Rng::gen_range(&mut *rng, -1.0..1.0));
    let chi = MatrixForm::scalar_function(mesh, move |x| C64::new(a * x[0].sin() + b * x[1].cos(), 0.0));
    TwzElement::new(g, GradedForm::from_parts([chi])?)
}

fn kt_group_laws(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("ktheory.group-laws");
    let mesh = c.arc_torus(2)?;
    let e1 = kt_element(&mut rng, &mesh, c.n())?;
    let e2 = kt_element(&mut rng, &mesh, c.n())?;
    let e3 = kt_element(&mut rng, &mesh, 1)?;
    let t = c.truncate();
    let f12 = e1.combine(&e2)?.curvature(t)?;
    let add = f12.distance(&e1.curvature(t)?.add(&e2.curvature(t)?)?)?;
    let swap = f12.distance(&e2.combine(&e1)?.curvature(t)?)?;
    let assoc = e1
        .combine(&e2)?
        .combine(&e3)?
        .curvature(t)?
        .distance(&e1.combine(&e2.combine(&e3)?)?.curvature(t)?)?;
    let inv = e1.inverse()?.curvature(t)?.add(&e1.curvature(t)?)?.max_abs();
    Ok(max_of([add, swap, assoc, inv]))
}

fn kt_equivalence(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("ktheory.inverse-equivalence");
    let mesh = c.arc_torus(2)?;
    let g = random_map(&mut rng, &mesh, c.n())?;
    let e0 = TwzElement::new(g.block_sum(&g.inverse()?)?, GradedForm::new())?;
    let e1 = TwzElement::identity(&mesh, 2 * c.n());
    let d = cs_equivalent(&e0, &e1, &nullhomotopy_construct(&g)?, c.cfg.sign)?;
    if !d.equivalent {
        return Ok(f64::INFINITY);
    }
    Ok(d.max_period.max(d.endpoint_defect))
}

// ---- degree-1 character

fn char_gauge(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("character.gauge-invariance");
    let base = c.torus(2)?;
    let p = c.first_pair(&mut rng, &base)?;
    let before = degree1_character(p.higgs())?;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let gamma = random_based_gauge(&mut rng, &base, p.theta_samples(), p.spec().rank, 1)?;
        let (q, _) = p.gauge_transform(&gamma)?;
        let after = degree1_character(q.higgs())?;
        worst = worst.max(max_of(before.iter().zip(&after).map(|(a, b)| circle_distance(*a, *b))));
    }
    Ok(worst)
}

fn char_constants(c: &Ctx) -> Result<f64> {
    let base = c.torus(1)?;
    let mesh = loop_mesh(&base, c.theta())?;
    let value = |phase: f64| -> Result<f64> {
        let field = MatrixForm::constant(&mesh, 1, &[C64::new(0.0, phase)]);
        let pair = GaugePair::from_forms(GroupSpec::unitary(1), MatrixForm::zero(&mesh, 1, 1)?, field)?;
        Ok(max_of(degree1_character(pair.higgs())?.iter().map(|v| v.abs())))
    };
    let integer = max_of([value(1.0)?, value(-3.0)?, value(0.0)?]);
    let half = value(0.5)?;
    // representative of 1/2 is -1/2
    let field = MatrixForm::constant(&mesh, 1, &[C64::new(0.0, 0.5)]);
    let pair = GaugePair::from_forms(GroupSpec::unitary(1), MatrixForm::zero(&mesh, 1, 1)?, field)?;
    let sign = max_of(degree1_character(pair.higgs())?.iter().map(|v| (v + 0.5).abs()));
    Ok(max_of([integer, (half - 0.5).abs(), sign]))
}

// ---- fiber integration and d

fn fiber_mesh(c: &Ctx) -> Result<Arc<Mesh>> {
    loop_mesh(&c.torus(2)?, c.theta())
}

fn fiber_d_commutes(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("fiber.d-commutes");
    let mesh = fiber_mesh(c)?;
    let mut worst: f64 = 0.0;
    for degree in 1..=2 {
        let w = random_form(&mut rng, &mesh, degree, c.n(), 2)?;
        worst = worst.max(w.fiber_integrate(2)?.d().distance(&w.d().fiber_integrate(2)?)?);
    }
    Ok(worst)
}

fn fiber_fubini(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("fiber.fubini");
    let mesh = fiber_mesh(c)?;
    let w = random_form(&mut rng, &mesh, 3, c.n(), 2)?;
    let mut worst: f64 = 0.0;
    for axis in 0..3 {
        let whole = w.integrate_top()?;
        let staged = w.fiber_integrate(axis)?.integrate_top()?;
        worst = worst.max(linalg::max_abs(&linalg::sub(&whole, &staged)));
    }
    Ok(worst)
}

fn fiber_slices(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("fiber.slice-naturality");
    let mesh = fiber_mesh(c)?;
    let mut worst: f64 = 0.0;
    for degree in 1..=2 {
        let w = random_form(&mut rng, &mesh, degree, c.n(), 2)?;
        let pushed = w.fiber_integrate(2)?;
        for index in [0, 3, mesh.shape()[0] - 1] {
            worst = worst.max(pushed.slice(0, index)?.distance(&w.slice(0, index)?.fiber_integrate(1)?)?);
        }
    }
    Ok(worst)
}

fn fiber_d_squared(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("fiber.d-squared");
    let mesh = fiber_mesh(c)?;
    let mut worst: f64 = 0.0;
    for degree in 0..=1 {
        let w = random_form(&mut rng, &mesh, degree, c.n(), 3)?;
        worst = worst.max(w.d().d().max_abs());
    }
    Ok(worst)
}

fn fiber_stokes(c: &Ctx) -> Result<f64> {
    let mut rng = c.rng("fiber.stokes");
    let mesh = fiber_mesh(c)?;
    let w = random_form(&mut rng, &mesh, 2, c.n(), 3)?;
    Ok(linalg::max_abs(&w.d().integrate_top()?))
}
