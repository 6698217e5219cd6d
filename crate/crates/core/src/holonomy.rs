//! Holonomy of a Higgs field: the endpoint of `g' = g Phi`, `g(0) = I`, at every base point.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gauge::{GroupMap, HiggsField};
use crate::linalg::{self, C64};
use crate::loopcore::{GroupSpec, SampledLoop};
use crate::meshforms::{MatrixForm, Mesh};
use crate::spectral;

pub const DEFAULT_STEPS: usize = 512;
/// Largest accepted Richardson error estimate.
pub const ERROR_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
pub struct HolonomyOptions {
    pub steps: usize,
    /// Project onto the unitary group after every step (compact groups only).
    pub reunitarize: bool,
    /// Keep the solution at every step, not just the endpoint.
    pub keep_paths: bool,
    pub error_limit: f64,
}

impl Default for HolonomyOptions {
    fn default() -> Self {
        HolonomyOptions { steps: DEFAULT_STEPS, reunitarize: false, keep_paths: false, error_limit: ERROR_LIMIT }
    }
}

/// Solution of the holonomy equation along one loop.
#[derive(Clone, Debug)]
pub struct LoopHolonomy {
    /// `g(2 pi)`
    pub endpoint: Vec<C64>,
    /// `g` at `theta_j = 2 pi j / steps`, `j = 0..=steps`, when requested.
    pub path: Option<Vec<Vec<C64>>>,
    /// `|g_steps(2 pi) - g_{steps/2}(2 pi)| / 15`.
    pub error_estimate: f64,
    /// Largest change made by re-unitarization; zero when disabled.
    pub reunitarization: f64,
}

#[derive(Clone, Debug)]
pub struct HolonomyResult {
    pub holonomy: GroupMap,
    pub paths: Option<Vec<Vec<Vec<C64>>>>,
    pub error_estimate: Vec<f64>,
    pub reunitarization: f64,
    pub steps: usize,
}

impl HolonomyResult {
    /// Largest `|h^* h - I|` over the grid.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.holonomy.spec().rank;
        (0..self.holonomy.mesh().len())
            .map(|p| linalg::unitarity_defect(&self.holonomy.value_at(p), n))
            .fold(0.0, f64::max)
    }

    pub fn max_error_estimate(&self) -> f64 {
        self.error_estimate.iter().cloned().fold(0.0, f64::max)
    }
}

/// Values of the trigonometric interpolant of `phi` on `m` uniform points.
fn dense_samples(phi: &SampledLoop, m: usize) -> Vec<Vec<C64>> {
    let n = phi.rank();
    let len = phi.len();
    let mut out = vec![vec![C64::new(0.0, 0.0); n * n]; m];
    for e in 0..n * n {
        let line: Vec<C64> = (0..len).map(|j| phi.sample(j)[e]).collect();
        let values = if m >= len {
            spectral::resample(&line, m)
        } else {
            let c = spectral::coefficients(&line);
            (0..m).map(|j| spectral::evaluate(&c, 2.0 * PI * j as f64 / m as f64)).collect()
        };
        for (o, v) in out.iter_mut().zip(values) {
            o[e] = v;
        }
    }
    out
}

/// RK4 for `g' = g Phi` using every `stride`-th point of `dense` (spacing `h / 2`
/// at stride 1). Returns the endpoint, the path and the re-unitarization size.
fn rk4(dense: &[Vec<C64>], n: usize, stride: usize, reunitarize: bool, keep: bool) -> (Vec<C64>, Option<Vec<Vec<C64>>>, f64) {
    let m = dense.len();
    let steps = m / (2 * stride);
    let h = 2.0 * PI / steps as f64;
    let mut g = linalg::identity(n);
    let mut path = keep.then(|| vec![g.clone()]);
    let mut correction: f64 = 0.0;
    let rhs = |g: &[C64], phi: &[C64]| linalg::mul(g, phi, n);
    let shift = |g: &[C64], k: &[C64], s: f64| linalg::add(g, &linalg::scale(k, C64::new(s, 0.0)));
    for j in 0..steps {
        let p0 = &dense[(2 * j * stride) % m];
        let pm = &dense[((2 * j + 1) * stride) % m];
        let p1 = &dense[((2 * j + 2) * stride) % m];
        let k1 = rhs(&g, p0);
        let k2 = rhs(&shift(&g, &k1, h / 2.0), pm);
        let k3 = rhs(&shift(&g, &k2, h / 2.0), pm);
        let k4 = rhs(&shift(&g, &k3, h), p1);
        for e in 0..n * n {
            g[e] += (k1[e] + 2.0 * k2[e] + 2.0 * k3[e] + k4[e]) * (h / 6.0);
        }
        if reunitarize {
            let u = linalg::polar_unitary(&g, n);
            correction = correction.max(linalg::max_abs(&linalg::sub(&u, &g)));
            g = u;
        }
        if let Some(p) = path.as_mut() {
            p.push(g.clone());
        }
    }
    (g, path, correction)
}

/// Holonomy along one algebra-valued loop.
pub fn loop_holonomy(phi: &SampledLoop, opts: HolonomyOptions) -> Result<LoopHolonomy> {
    if !phi.is_algebra() {
        return Err(Error::Validation("holonomy needs an algebra-valued loop".into()));
    }
    if opts.steps < 8 || opts.steps % 2 != 0 {
        return Err(Error::Validation(format!("step count {} must be even and at least 8", opts.steps)));
    }
    let n = phi.rank();
    let reunitarize = opts.reunitarize && phi.spec().is_compact();
    let dense = dense_samples(phi, 2 * opts.steps);
    let (endpoint, path, reunitarization) = rk4(&dense, n, 1, reunitarize, opts.keep_paths);
    let (coarse, _, _) = rk4(&dense, n, 2, reunitarize, false);
    let error_estimate = linalg::max_abs(&linalg::sub(&endpoint, &coarse)) / 15.0;
    if error_estimate > opts.error_limit {
        return Err(Error::StepCountTooLow { estimate: error_estimate, limit: opts.error_limit });
    }
    Ok(LoopHolonomy { endpoint, path, error_estimate, reunitarization })
}

/// `hol_Phi` on the base mesh, solving every base point independently.
pub fn higgs_holonomy(phi: &HiggsField, opts: HolonomyOptions) -> Result<HolonomyResult> {
    let loops = phi.loops()?;
    // Without re-unitarization the endpoints are unitary only to solver
    // accuracy, so they are stored as general linear elements.
    let spec = if opts.reunitarize || !phi.spec().is_compact() {
        phi.spec()
    } else {
        GroupSpec::general_linear(phi.spec().rank)
    };
    let solved: Vec<LoopHolonomy> = loops.par_iter().map(|l| loop_holonomy(l, opts)).collect::<Result<_>>()?;
    let mesh = phi.field().mesh();
    let base: Arc<Mesh> = Arc::new(mesh.remove_axis(mesh.dim() - 1)?);
    let nn = spec.rank * spec.rank;
    let mut data = Vec::with_capacity(loops.len() * nn);
    for s in &solved {
        data.extend_from_slice(&s.endpoint);
    }
    let values = MatrixForm::from_components(&base, 0, spec.rank, std::iter::once((vec![], data)))?;
    Ok(HolonomyResult {
        holonomy: GroupMap::new(spec, values)?,
        error_estimate: solved.iter().map(|s| s.error_estimate).collect(),
        reunitarization: solved.iter().map(|s| s.reunitarization).fold(0.0, f64::max),
        paths: opts.keep_paths.then(|| solved.iter().map(|s| s.path.clone().unwrap_or_default()).collect()),
        steps: opts.steps,
    })
}
