//! Smooth one-parameter families of gauge pairs and of 1-forms.

use crate::error::{Error, Result};
use crate::gauge::GaugePair;
use crate::linalg::C64;
use crate::meshforms::MatrixForm;

/// A family `t -> (A_t, Phi_t)`, `t in [0, 1]`, with its velocity `(B_t, phi_t)`.
pub trait PairPath {
    fn at(&self, t: f64) -> Result<GaugePair>;
    fn velocity(&self, t: f64) -> Result<(MatrixForm, MatrixForm)>;
    /// Points where the family may fail to be smooth, including 0 and 1.
    fn breakpoints(&self) -> Vec<f64> {
        vec![0.0, 1.0]
    }
}

/// A family of matrix-valued 1-forms with its velocity.
pub trait FormPath {
    fn at(&self, t: f64) -> Result<MatrixForm>;
    fn velocity(&self, t: f64) -> Result<MatrixForm>;
    fn breakpoints(&self) -> Vec<f64> {
        vec![0.0, 1.0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    Affine,
    /// Cubic Hermite through the knots with Catmull–Rom slopes.
    PiecewiseCubic,
}

/// Interpolating path through gauge pairs at increasing knot times from 0 to 1.
#[derive(Clone, Debug)]
pub struct SmoothPath {
    rule: Interpolation,
    times: Vec<f64>,
    knots: Vec<(MatrixForm, MatrixForm)>,
    slopes: Vec<(MatrixForm, MatrixForm)>,
    template: GaugePair,
}

fn lin(terms: &[(f64, &(MatrixForm, MatrixForm))]) -> Result<(MatrixForm, MatrixForm)> {
    let (c0, first) = terms[0];
    let mut a = first.0.scale_real(c0);
    let mut p = first.1.scale_real(c0);
    for (c, x) in &terms[1..] {
        a = a.axpy(C64::new(*c, 0.0), &x.0)?;
        p = p.axpy(C64::new(*c, 0.0), &x.1)?;
    }
    Ok((a, p))
}

fn split(p: &GaugePair) -> (MatrixForm, MatrixForm) {
    (p.connection().form().clone(), p.higgs().field().clone())
}

impl SmoothPath {
    /// `t -> (1 - t) start + t end`.
    pub fn affine(start: &GaugePair, end: &GaugePair) -> Result<Self> {
        if start.spec() != end.spec() || **start.mesh() != **end.mesh() {
            return Err(Error::MeshMismatch);
        }
        let knots = vec![split(start), split(end)];
        let v = lin(&[(1.0, &knots[1]), (-1.0, &knots[0])])?;
        Ok(SmoothPath {
            rule: Interpolation::Affine,
            times: vec![0.0, 1.0],
            slopes: vec![v.clone(), v],
            knots,
            template: start.clone(),
        })
    }

    /// Piecewise-cubic path through `(t_i, pair_i)`, with `t_0 = 0 < .. < t_last = 1`.
    pub fn cubic(nodes: &[(f64, GaugePair)]) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Validation("a path needs at least two knots".into()));
        }
        let times: Vec<f64> = nodes.iter().map(|(t, _)| *t).collect();
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("knot times must increase from 0 to 1".into()));
        }
        let template = nodes[0].1.clone();
        for (_, p) in nodes {
            if p.spec() != template.spec() || **p.mesh() != **template.mesh() {
                return Err(Error::MeshMismatch);
            }
        }
        let knots: Vec<_> = nodes.iter().map(|(_, p)| split(p)).collect();
        let m = knots.len();
        let mut slopes = Vec::with_capacity(m);
        for i in 0..m {
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(m - 1));
            let h = times[hi] - times[lo];
            slopes.push(lin(&[(1.0 / h, &knots[hi]), (-1.0 / h, &knots[lo])])?);
        }
        Ok(SmoothPath { rule: Interpolation::PiecewiseCubic, times, knots, slopes, template })
    }

    pub fn rule(&self) -> Interpolation {
        self.rule
    }

    fn segment(&self, t: f64) -> Result<(usize, f64, f64)> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Validation(format!("path parameter {t} outside [0, 1]")));
        }
        let i = self.times.windows(2).position(|w| t <= w[1]).unwrap_or(self.times.len() - 2);
        let h = self.times[i + 1] - self.times[i];
        Ok((i, (t - self.times[i]) / h, h))
    }

    fn eval(&self, t: f64) -> Result<(MatrixForm, MatrixForm)> {
        let (i, s, h) = self.segment(t)?;
        let (p0, p1) = (&self.knots[i], &self.knots[i + 1]);
        match self.rule {
            Interpolation::Affine => lin(&[(1.0 - s, p0), (s, p1)]),
            Interpolation::PiecewiseCubic => {
                let (s2, s3) = (s * s, s * s * s);
                lin(&[
                    (2.0 * s3 - 3.0 * s2 + 1.0, p0),
                    (h * (s3 - 2.0 * s2 + s), &self.slopes[i]),
                    (-2.0 * s3 + 3.0 * s2, p1),
                    (h * (s3 - s2), &self.slopes[i + 1]),
                ])
            }
        }
    }

    fn derivative(&self, t: f64) -> Result<(MatrixForm, MatrixForm)> {
        let (i, s, h) = self.segment(t)?;
        let (p0, p1) = (&self.knots[i], &self.knots[i + 1]);
        match self.rule {
            Interpolation::Affine => lin(&[(1.0 / h, p1), (-1.0 / h, p0)]),
            Interpolation::PiecewiseCubic => {
                let s2 = s * s;
                lin(&[
                    ((6.0 * s2 - 6.0 * s) / h, p0),
                    (3.0 * s2 - 4.0 * s + 1.0, &self.slopes[i]),
                    ((-6.0 * s2 + 6.0 * s) / h, p1),
                    (3.0 * s2 - 2.0 * s, &self.slopes[i + 1]),
                ])
            }
        }
    }
}

impl PairPath for SmoothPath {
    fn at(&self, t: f64) -> Result<GaugePair> {
        let (a, p) = self.eval(t)?;
        GaugePair::from_forms(self.template.spec(), a, p)
    }

    fn velocity(&self, t: f64) -> Result<(MatrixForm, MatrixForm)> {
        self.derivative(t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.times.clone()
    }
}

type PairAt<'a> = Box<dyn Fn(f64) -> Result<GaugePair> + 'a>;
type PairVelocity<'a> = Box<dyn Fn(f64) -> Result<(MatrixForm, MatrixForm)> + 'a>;

/// A path given by closures for the family and its velocity.
pub struct FamilyPath<'a> {
    at: PairAt<'a>,
    velocity: PairVelocity<'a>,
    breakpoints: Vec<f64>,
}

impl<'a> FamilyPath<'a> {
    pub fn new(
        at: impl Fn(f64) -> Result<GaugePair> + 'a,
        velocity: impl Fn(f64) -> Result<(MatrixForm, MatrixForm)> + 'a,
    ) -> Self {
        FamilyPath { at: Box::new(at), velocity: Box::new(velocity), breakpoints: vec![0.0, 1.0] }
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }
}

impl PairPath for FamilyPath<'_> {
    fn at(&self, t: f64) -> Result<GaugePair> {
        (self.at)(t)
    }

    fn velocity(&self, t: f64) -> Result<(MatrixForm, MatrixForm)> {
        (self.velocity)(t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }
}

/// `t -> (1 - t) start + t end` for 1-forms.
#[derive(Clone, Debug)]
pub struct AffineFormPath {
    start: MatrixForm,
    end: MatrixForm,
    velocity: MatrixForm,
}

impl AffineFormPath {
    pub fn new(start: MatrixForm, end: MatrixForm) -> Result<Self> {
        if start.degree() != 1 || end.degree() != 1 {
            return Err(Error::DegreeMismatch { expected: 1, found: start.degree().max(end.degree()) });
        }
        let velocity = end.sub(&start)?;
        Ok(AffineFormPath { start, end, velocity })
    }
}

impl FormPath for AffineFormPath {
    fn at(&self, t: f64) -> Result<MatrixForm> {
        self.start.scale_real(1.0 - t).axpy(C64::new(t, 0.0), &self.end)
    }

    fn velocity(&self, _t: f64) -> Result<MatrixForm> {
        Ok(self.velocity.clone())
    }
}

/// The caloron transform `A_t + Phi_t d theta` of a path of gauge pairs.
pub struct CaloronPath<'a> {
    inner: &'a dyn PairPath,
}

impl<'a> CaloronPath<'a> {
    pub fn new(inner: &'a dyn PairPath) -> Self {
        CaloronPath { inner }
    }
}

impl FormPath for CaloronPath<'_> {
    fn at(&self, t: f64) -> Result<MatrixForm> {
        self.inner.at(t)?.caloron_transform()
    }

    fn velocity(&self, t: f64) -> Result<MatrixForm> {
        let (b, phi) = self.inner.velocity(t)?;
        let axis = b.mesh().dim() - 1;
        let dth = MatrixForm::coordinate_differential(b.mesh(), axis)?;
        b.add(&phi.wedge(&dth)?)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshforms::Mesh;
    use crate::samples::{random_pair, rng, PairShape};

    fn pairs(seed: u64, count: usize) -> Vec<GaugePair> {
        let base = Mesh::torus(&[8, 8]).unwrap();
        let mut r = rng(seed);
        (0..count).map(|_| random_pair(&mut r, &base, PairShape { n_theta: 8, ..Default::default() }).unwrap()).collect()
    }

    #[test]
    fn cubic_hits_knots() {
        let p = pairs(1, 3);
        let path = SmoothPath::cubic(&[(0.0, p[0].clone()), (0.3, p[1].clone()), (1.0, p[2].clone())]).unwrap();
        for (t, q) in [(0.0, &p[0]), (0.3, &p[1]), (1.0, &p[2])] {
            assert!(path.at(t).unwrap().distance(q).unwrap() < 1e-14);
        }
    }

    #[test]
    fn velocity_matches_difference_quotient() {
        let p = pairs(2, 3);
        let path = SmoothPath::cubic(&[(0.0, p[0].clone()), (0.6, p[1].clone()), (1.0, p[2].clone())]).unwrap();
        let (t, h) = (0.4, 1e-5);
        let fd = path.at(t + h).unwrap().affine(&path.at(t - h).unwrap(), 0.5).unwrap();
        let (b, phi) = path.velocity(t).unwrap();
        let (ap, am) = (path.at(t + h).unwrap(), path.at(t - h).unwrap());
        let qb = ap.connection().form().sub(am.connection().form()).unwrap().scale_real(0.5 / h);
        let qp = ap.higgs().field().sub(am.higgs().field()).unwrap().scale_real(0.5 / h);
        assert!(qb.distance(&b).unwrap() < 1e-8);
        assert!(qp.distance(&phi).unwrap() < 1e-8);
        assert!(fd.distance(&path.at(t).unwrap()).unwrap() < 1e-8);
    }

    #[test]
    fn affine_path_is_linear() {
        let p = pairs(3, 2);
        let path = SmoothPath::affine(&p[0], &p[1]).unwrap();
        assert!(path.at(0.25).unwrap().distance(&p[0].affine(&p[1], 0.25).unwrap()).unwrap() < 1e-15);
        assert!(path.at(1.5).is_err());
    }

    #[test]
    fn knot_times_are_validated() {
        let p = pairs(4, 2);
        assert!(SmoothPath::cubic(&[(0.0, p[0].clone()), (0.9, p[1].clone())]).is_err());
    }
}
