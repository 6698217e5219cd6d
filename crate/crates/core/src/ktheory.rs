//! Pairs `(g, chi)` of a unitary map and an even form, their arithmetic,
//! curvature, and the Chern–Simons integral of a homotopy of maps.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coefficients;
use crate::error::{Error, Result};
use crate::gauge::{GroupMap, Side};
use crate::invariants::{odd_chern_character, two_pi_i_pow, T_QUAD_NODES};
use crate::linalg::{C64, ONE, ZERO};
use crate::loopcore::{GroupSpec, TOL_ALG};
use crate::meshforms::{Factor, GradedForm, MatrixForm, Mesh};
use crate::quadrature;

/// Tolerance of the period test deciding equivalence.
pub const TOL_EQUIVALENCE: f64 = 1e-6;

/// A representative `(g, chi)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TwzWire", into = "TwzWire")]
pub struct TwzElement {
    g: GroupMap,
    chi: GradedForm,
    /// Rank of identity blocks added by [`TwzElement::pad_to`].
    padding: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ChiWire {
    Single(MatrixForm),
    Parts(Vec<MatrixForm>),
}

#[derive(Serialize, Deserialize)]
struct TwzWire {
    g: GroupMap,
    chi: ChiWire,
    n: usize,
}

impl TryFrom<TwzWire> for TwzElement {
    type Error = Error;
    fn try_from(w: TwzWire) -> Result<Self> {
        let parts = match w.chi {
            ChiWire::Single(f) => vec![f],
            ChiWire::Parts(v) => v,
        };
        if w.n != w.g.spec().rank {
            return Err(Error::DimensionMismatch(format!("n = {} but g has rank {}", w.n, w.g.spec().rank)));
        }
        TwzElement::new(w.g, GradedForm::from_parts(parts)?)
    }
}

impl From<TwzElement> for TwzWire {
    fn from(e: TwzElement) -> Self {
        let n = e.rank();
        TwzWire { chi: ChiWire::Parts(e.chi.parts().map(|(_, f)| f.clone()).collect()), g: e.g, n }
    }
}

impl TwzElement {
    pub fn new(g: GroupMap, chi: GradedForm) -> Result<Self> {
        if !g.spec().is_compact() {
            return Err(Error::Validation("g must take values in a unitary group".into()));
        }
        chi.only_degrees(true)?;
        for (_, f) in chi.parts() {
            if **f.mesh() != **g.mesh() {
                return Err(Error::MeshMismatch);
            }
            if f.rank() != 1 {
                return Err(Error::Validation("chi must be scalar-valued".into()));
            }
        }
        if chi.max_imag_abs() > TOL_ALG {
            return Err(Error::Validation(format!("chi is not real (imaginary part {:e})", chi.max_imag_abs())));
        }
        Ok(TwzElement { g, chi, padding: 0 })
    }

    /// `(I_n, 0)`
    pub fn identity(mesh: &Arc<Mesh>, n: usize) -> Self {
        TwzElement { g: GroupMap::identity(mesh, GroupSpec::unitary(n)), chi: GradedForm::new(), padding: 0 }
    }

    pub fn g(&self) -> &GroupMap {
        &self.g
    }

    pub fn chi(&self) -> &GradedForm {
        &self.chi
    }

    pub fn rank(&self) -> usize {
        self.g.spec().rank
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    /// `(g ⊕ I, chi)` of rank `rank`.
    pub fn pad_to(&self, rank: usize) -> Result<Self> {
        let g = self.g.pad_to(rank)?;
        Ok(TwzElement { g, chi: self.chi.clone(), padding: self.padding + rank - self.rank() })
    }

    /// `(g1 ⊕ g2, chi1 + chi2)`
    pub fn combine(&self, other: &TwzElement) -> Result<Self> {
        if **self.g.mesh() != **other.g.mesh() {
            return Err(Error::MeshMismatch);
        }
        Ok(TwzElement {
            g: self.g.block_sum(&other.g)?,
            chi: self.chi.add(&other.chi)?,
            padding: self.padding + other.padding,
        })
    }

    /// `(g^{-1}, -chi)`
    pub fn inverse(&self) -> Result<Self> {
        Ok(TwzElement { g: self.g.inverse()?, chi: self.chi.neg(), padding: self.padding })
    }

    /// `ch(g) + d chi`, truncated at the mesh dimension and `truncate`.
    pub fn curvature(&self, truncate: Option<usize>) -> Result<GradedForm> {
        let mut out = odd_chern_character(&self.g, truncate)?;
        let top = truncate.unwrap_or(usize::MAX);
        for (_, f) in self.chi.d()?.parts() {
            if f.degree() <= top {
                out.add_part(f.clone())?;
            }
        }
        Ok(out)
    }
}

type MapAt = Arc<dyn Fn(f64) -> Result<GroupMap> + Send + Sync>;
type MapVelocity = Arc<dyn Fn(f64) -> Result<MatrixForm> + Send + Sync>;

/// A homotopy `t -> g_t`, `t in [0, 1]`, with its `t`-derivative.
#[derive(Clone)]
pub struct HomotopySpec {
    at: MapAt,
    velocity: MapVelocity,
    nodes: usize,
}

impl std::fmt::Debug for HomotopySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HomotopySpec").field("nodes", &self.nodes).finish()
    }
}

impl HomotopySpec {
    pub fn new(
        at: impl Fn(f64) -> Result<GroupMap> + Send + Sync + 'static,
        velocity: impl Fn(f64) -> Result<MatrixForm> + Send + Sync + 'static,
    ) -> Self {
        HomotopySpec { at: Arc::new(at), velocity: Arc::new(velocity), nodes: T_QUAD_NODES }
    }

    /// A homotopy sampled on `mesh x Interval(N_t)` (the last axis is `t`),
    /// interpolated between nodes; the derivative is the interval stencil.
    pub fn sampled(map: GroupMap) -> Result<Self> {
        let mesh = map.mesh().clone();
        let axis = mesh.dim().checked_sub(1).ok_or_else(|| Error::InvalidMesh("a homotopy needs a time axis".into()))?;
        let n_t = match mesh.factor(axis) {
            Factor::Interval { n } => n,
            _ => return Err(Error::Validation("the last axis of a sampled homotopy must be an interval".into())),
        };
        let spec = map.spec();
        let slices: Vec<MatrixForm> = (0..n_t).map(|j| map.values().slice(axis, j)).collect::<Result<_>>()?;
        let dt = map.values().partial(axis)?;
        let dslices: Vec<MatrixForm> = (0..n_t).map(|j| dt.slice(axis, j)).collect::<Result<_>>()?;
        let blend = move |forms: &[MatrixForm], t: f64| -> Result<MatrixForm> {
            let row = quadrature::interval_interpolation_row(n_t, t);
            let mut acc = forms[0].scale(ZERO);
            for (j, w) in row {
                acc = acc.axpy(C64::new(w, 0.0), &forms[j])?;
            }
            Ok(acc)
        };
        let slices = Arc::new(slices);
        let dslices = Arc::new(dslices);
        let s2 = slices.clone();
        Ok(HomotopySpec::new(
            move |t| {
                let v = blend(&s2, t)?;
                GroupMap::new(GroupSpec::general_linear(spec.rank), v)
            },
            move |t| blend(&dslices, t),
        ))
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn at(&self, t: f64) -> Result<GroupMap> {
        (self.at)(t)
    }

    pub fn velocity(&self, t: f64) -> Result<MatrixForm> {
        (self.velocity)(t)
    }

    /// `max |g_0 - start|, |g_1 - end|`.
    pub fn endpoint_defect(&self, start: &GroupMap, end: &GroupMap) -> Result<f64> {
        let a = self.at(0.0)?.values().distance(start.values())?;
        let b = self.at(1.0)?.values().distance(end.values())?;
        Ok(a.max(b))
    }

    fn t_nodes(&self) -> Vec<(f64, f64)> {
        let (x, w) = quadrature::gauss_legendre_on(self.nodes, 0.0, 1.0);
        x.into_iter().zip(w).collect()
    }
}

/// `tr(g^{-1} d_t g (g^{-1} dg)^{2j})` at one `t`, for `j = 0..=j_max`.
fn homotopy_integrands(h: &HomotopySpec, t: f64, j_max: usize) -> Result<Vec<MatrixForm>> {
    let g = h.at(t)?;
    let gi = g.inverse()?;
    let lead = gi.values().wedge(&h.velocity(t)?)?;
    let theta = g.mc_pullback(Side::Left)?;
    let theta2 = theta.wedge(&theta)?;
    let mut chain = lead;
    let mut out = Vec::new();
    for _ in 0..=j_max {
        out.push(chain.trace());
        chain = chain.wedge(&theta2)?;
    }
    Ok(out)
}

fn j_max(mesh: &Mesh, truncate: Option<usize>) -> usize {
    truncate.unwrap_or(usize::MAX).min(mesh.dim()) / 2
}

/// `sum_j (-j!/(2j)!) (-1/2 pi i)^{j+1} integral_0^1 tr(g^{-1} d_t g (g^{-1} dg)^{2j}) dt`.
pub fn homotopy_cs_integral(h: &HomotopySpec, truncate: Option<usize>) -> Result<GradedForm> {
    let mesh = h.at(0.0)?.mesh().clone();
    let jm = j_max(&mesh, truncate);
    let coef: Vec<C64> = (0..=jm)
        .map(|j| {
            let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(sign * coefficients::to_f64(&coefficients::homotopy_rational(j)), 0.0) / two_pi_i_pow(j + 1)
        })
        .collect();
    let mut parts: Vec<Option<MatrixForm>> = vec![None; jm + 1];
    for (t, w) in h.t_nodes() {
        for (j, f) in homotopy_integrands(h, t, jm)?.into_iter().enumerate() {
            let term = f.scale(coef[j] * w);
            parts[j] = Some(match parts[j].take() {
                None => term,
                Some(acc) => acc.add(&term)?,
            });
        }
    }
    GradedForm::from_parts(parts.into_iter().flatten())
}

/// Largest `|tr(g^{-1} d_t g (g^{-1} dg)^{2j})|` over the grid and the `t` nodes, per `j`.
pub fn homotopy_integrand_max(h: &HomotopySpec, truncate: Option<usize>) -> Result<Vec<f64>> {
    let mesh = h.at(0.0)?.mesh().clone();
    let jm = j_max(&mesh, truncate);
    let mut out = vec![0.0f64; jm + 1];
    let mut ts: Vec<f64> = h.t_nodes().into_iter().map(|(t, _)| t).collect();
    ts.extend([0.0, 1.0]);
    for t in ts {
        for (j, f) in homotopy_integrands(h, t, jm)?.into_iter().enumerate() {
            out[j] = out[j].max(f.max_abs());
        }
    }
    Ok(out)
}

/// `X_t = A R(s) B R(s)^{-1}`, `s = pi t / 2`, with `A = diag(g, 1)`,
/// `B = diag(1, g^{-1})` and `R` the block rotation: a homotopy from
/// `g ⊕ g^{-1}` to the identity.
pub fn nullhomotopy_construct(g: &GroupMap) -> Result<HomotopySpec> {
    if !g.spec().is_compact() {
        return Err(Error::Validation("the nullhomotopy needs a unitary map".into()));
    }
    let n = g.spec().rank;
    let spec = GroupSpec::unitary(2 * n);
    let mesh = g.mesh().clone();
    let one = GroupMap::identity(&mesh, GroupSpec::unitary(n));
    let a = g.block_sum(&one)?.values().clone();
    let b = one.block_sum(&g.inverse()?)?.values().clone();
    let rotation = move |s: f64, deriv: bool| {
        let (sn, cs) = s.sin_cos();
        let (c, sgn) = if deriv { (-sn, cs) } else { (cs, sn) };
        let mut r = vec![ZERO; 4 * n * n];
        for i in 0..n {
            r[i * 2 * n + i] = ONE * c;
            r[(n + i) * 2 * n + n + i] = ONE * c;
            r[i * 2 * n + n + i] = -ONE * sgn;
            r[(n + i) * 2 * n + i] = ONE * sgn;
        }
        r
    };
    let (a2, b2, m2) = (a.clone(), b.clone(), mesh.clone());
    let at = move |t: f64| {
        let s = PI * t / 2.0;
        let r = MatrixForm::constant(&m2, 2 * n, &rotation(s, false));
        let rt = r.adjoint();
        let x = a2.wedge(&r)?.wedge(&b2)?.wedge(&rt)?;
        GroupMap::new(spec, x)
    };
    // d/dt X = (pi/2) A (R' B R^{-1} - R B R^{-1} R' R^{-1})
    let velocity = move |t: f64| {
        let s = PI * t / 2.0;
        let r = MatrixForm::constant(&mesh, 2 * n, &rotation(s, false));
        let rp = MatrixForm::constant(&mesh, 2 * n, &rotation(s, true));
        let rt = r.adjoint();
        let first = a.wedge(&rp)?.wedge(&b)?.wedge(&rt)?;
        let second = a.wedge(&r)?.wedge(&b)?.wedge(&rt)?.wedge(&rp)?.wedge(&rt)?;
        Ok(first.sub(&second)?.scale_real(PI / 2.0))
    };
    Ok(HomotopySpec::new(at, velocity))
}

/// Sign applied to the homotopy integral in the equivalence test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquivalenceSign {
    /// The relation as printed.
    #[default]
    AsPrinted,
    /// The opposite sign, as suggested by the footnote on the source.
    Footnote,
}

impl EquivalenceSign {
    fn factor(self) -> f64 {
        match self {
            EquivalenceSign::AsPrinted => 1.0,
            EquivalenceSign::Footnote => -1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceDecision {
    pub equivalent: bool,
    pub max_period: f64,
    pub endpoint_defect: f64,
    pub tolerance: f64,
}

/// Decides whether `e0 ~ e1` through the homotopy `h` from `g0` to `g1`:
/// the periods of `CS(h) - (chi0 - chi1)` must vanish.
pub fn cs_equivalent(e0: &TwzElement, e1: &TwzElement, h: &HomotopySpec, sign: EquivalenceSign) -> Result<EquivalenceDecision> {
    let endpoint_defect = h.endpoint_defect(e0.g(), e1.g())?;
    let cs = homotopy_cs_integral(h, None)?;
    let mut diff = GradedForm::new();
    for (_, f) in cs.parts() {
        diff.add_part(f.scale_real(sign.factor()))?;
    }
    let diff = diff.sub(&e0.chi().sub(e1.chi())?)?;
    let max_period = diff.max_period()?;
    Ok(EquivalenceDecision {
        equivalent: max_period <= TOL_EQUIVALENCE && endpoint_defect <= TOL_ALG,
        max_period,
        endpoint_defect,
        tolerance: TOL_EQUIVALENCE,
    })
}
