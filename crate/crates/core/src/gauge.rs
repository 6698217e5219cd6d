//! Connections and Higgs fields on trivialized loop-group bundles, the gauge
//! action, and the caloron transform.
//!
//! Loop values are stored on the extended mesh `base x Circle(N_theta)` with
//! the loop coordinate as the last axis. A connection is a 1-form there with
//! no `d theta` component; a Higgs field is a 0-form there.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::loopcore::{GroupSpec, SampledLoop, TOL_ALG};
use crate::meshforms::{axes_mask, Factor, MatrixForm, Mesh};

/// Tolerance for `gamma(x)(0) = I` on gauge transforms and for vanishing
/// theta = 0 slices of based connections.
pub const TOL_BASED_FIELD: f64 = 1e-10;

/// The mesh `base x Circle(n_theta)`.
pub fn loop_mesh(base: &Mesh, n_theta: usize) -> Result<Arc<Mesh>> {
    Ok(Arc::new(base.append(Factor::Circle { n: n_theta })?))
}

fn loop_axis_of(mesh: &Mesh) -> Result<usize> {
    let d = mesh.dim();
    if d == 0 || !mesh.factor(d - 1).is_circle() {
        return Err(Error::MissingThetaFactor);
    }
    Ok(d - 1)
}

fn base_mask(mesh: &Mesh) -> u32 {
    axes_mask(&(0..mesh.dim() - 1).collect::<Vec<_>>())
}

fn check_algebra(form: &MatrixForm, spec: &GroupSpec, what: &str) -> Result<()> {
    if form.rank() != spec.rank {
        return Err(Error::DimensionMismatch(format!("{what} has rank {}, spec has {}", form.rank(), spec.rank)));
    }
    if spec.is_compact() {
        let defect = form.skew_defect();
        if defect > TOL_ALG {
            return Err(Error::Validation(format!("{what} is not skew-Hermitian (defect {defect:e})")));
        }
    }
    Ok(())
}

/// Curvature `dA + 1/2 [A, A]` of a matrix-valued 1-form, using every mesh axis.
pub fn curvature_of(a: &MatrixForm) -> Result<MatrixForm> {
    a.d().axpy(C64::new(0.5, 0.0), &a.bracket(a)?)
}

/// A map from a mesh into a matrix group, stored as a 0-form.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "GroupMapWire", into = "GroupMapWire")]
pub struct GroupMap {
    spec: GroupSpec,
    values: MatrixForm,
}

#[derive(Serialize, Deserialize)]
struct GroupMapWire {
    spec: GroupSpec,
    values: MatrixForm,
}

impl TryFrom<GroupMapWire> for GroupMap {
    type Error = Error;
    fn try_from(w: GroupMapWire) -> Result<Self> {
        GroupMap::new(w.spec, w.values)
    }
}

impl From<GroupMap> for GroupMapWire {
    fn from(g: GroupMap) -> Self {
        GroupMapWire { spec: g.spec, values: g.values }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `g^{-1} dg`
    Left,
    /// `dg g^{-1}`
    Right,
}

impl GroupMap {
    pub fn new(spec: GroupSpec, values: MatrixForm) -> Result<Self> {
        spec.validate()?;
        if values.degree() != 0 {
            return Err(Error::DegreeMismatch { expected: 0, found: values.degree() });
        }
        if values.rank() != spec.rank {
            return Err(Error::DimensionMismatch(format!("values have rank {}, spec has {}", values.rank(), spec.rank)));
        }
        for p in 0..values.mesh().len() {
            spec.check_group_element(&values.value_at(p)?)?;
        }
        Ok(GroupMap { spec, values })
    }

    pub fn from_fn(mesh: &Arc<Mesh>, spec: GroupSpec, f: impl Fn(&[f64]) -> Vec<C64>) -> Result<Self> {
        GroupMap::new(spec, MatrixForm::function(mesh, spec.rank, f))
    }

    pub fn identity(mesh: &Arc<Mesh>, spec: GroupSpec) -> Self {
        GroupMap { spec, values: MatrixForm::constant(mesh, spec.rank, &linalg::identity(spec.rank)) }
    }

    /// Gauge transform on `base x Circle(N)` from one loop per base point.
    pub fn from_loops(base: &Mesh, loops: &[SampledLoop]) -> Result<Self> {
        let first = loops.first().ok_or_else(|| Error::Validation("no loops given".into()))?;
        if loops.len() != base.len() {
            return Err(Error::SampleCountMismatch { left: loops.len(), right: base.len() });
        }
        let mesh = loop_mesh(base, first.len())?;
        let spec = first.spec();
        let mut data = Vec::with_capacity(mesh.len() * spec.rank * spec.rank);
        for l in loops {
            if l.is_algebra() || l.spec() != spec || l.len() != first.len() {
                return Err(Error::Validation("loops must share a group spec and sample count".into()));
            }
            data.extend_from_slice(l.samples());
        }
        let values = MatrixForm::from_components(&mesh, 0, spec.rank, [(vec![], data)])?;
        Ok(GroupMap { spec, values })
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.values.mesh()
    }

    pub fn values(&self) -> &MatrixForm {
        &self.values
    }

    pub fn value_at(&self, p: usize) -> Vec<C64> {
        self.values.value_at(p).expect("group map is a 0-form")
    }

    pub fn inverse(&self) -> Result<GroupMap> {
        let spec = self.spec;
        let mut err = None;
        let values = self.values.map_values(spec.rank, |g| match spec.invert(g) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                vec![C64::new(f64::NAN, 0.0); g.len()]
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(GroupMap { spec, values }),
        }
    }

    pub fn product(&self, other: &GroupMap) -> Result<GroupMap> {
        if self.spec.rank != other.spec.rank {
            return Err(Error::DimensionMismatch("product of maps of different rank".into()));
        }
        let spec = if self.spec == other.spec { self.spec } else { GroupSpec::general_linear(self.spec.rank) };
        Ok(GroupMap { spec, values: self.values.wedge(&other.values)? })
    }

    pub fn block_sum(&self, other: &GroupMap) -> Result<GroupMap> {
        Ok(GroupMap { spec: self.spec.block_sum(&other.spec), values: self.values.block_sum(&other.values)? })
    }

    /// Pads with an identity block up to `rank`.
    pub fn pad_to(&self, rank: usize) -> Result<GroupMap> {
        if rank < self.spec.rank {
            return Err(Error::DimensionMismatch(format!("cannot pad rank {} down to {rank}", self.spec.rank)));
        }
        if rank == self.spec.rank {
            return Ok(self.clone());
        }
        let spec = GroupSpec { family: self.spec.family, rank: rank - self.spec.rank };
        self.block_sum(&GroupMap::identity(self.mesh(), spec))
    }

    /// Pullback `g^* Theta` (left) or `g^* Theta-hat` (right) of the Maurer–Cartan form.
    pub fn mc_pullback(&self, side: Side) -> Result<MatrixForm> {
        let inv = self.inverse()?;
        let dg = self.values.d();
        match side {
            Side::Left => inv.values.wedge(&dg),
            Side::Right => dg.wedge(&inv.values),
        }
    }

    /// Max over base points of `|gamma(x)(0) - I|`, for maps on a loop mesh.
    pub fn basedness_defect(&self) -> Result<f64> {
        let axis = loop_axis_of(self.mesh())?;
        let slice = self.values.slice(axis, 0)?;
        let n = self.spec.rank;
        let id = MatrixForm::constant(slice.mesh(), n, &linalg::identity(n));
        slice.distance(&id)
    }

    /// Loop at base point `p`, for maps on a loop mesh.
    pub fn loop_at(&self, p: usize) -> Result<SampledLoop> {
        let axis = loop_axis_of(self.mesh())?;
        let nt = self.mesh().factor(axis).len();
        let nn = self.spec.rank * self.spec.rank;
        let data = self.values.component_or_zero(0);
        SampledLoop::group(self.spec, data[p * nt * nn..(p + 1) * nt * nn].to_vec())
    }
}

/// An `L g`-valued 1-form on the base: a 1-form on the loop mesh without a
/// `d theta` component.
#[derive(Clone, Debug)]
pub struct Connection {
    spec: GroupSpec,
    form: MatrixForm,
}

impl Connection {
    pub fn new(spec: GroupSpec, form: MatrixForm) -> Result<Self> {
        let axis = loop_axis_of(form.mesh())?;
        if form.degree() != 1 {
            return Err(Error::DegreeMismatch { expected: 1, found: form.degree() });
        }
        if form.components().any(|(m, _)| m & (1 << axis) != 0) {
            return Err(Error::Validation("connection has a d(theta) component".into()));
        }
        check_algebra(&form, &spec, "connection")?;
        Ok(Connection { spec, form })
    }

    pub fn zero(mesh: &Arc<Mesh>, spec: GroupSpec) -> Result<Self> {
        Connection::new(spec, MatrixForm::zero(mesh, 1, spec.rank)?)
    }

    pub fn form(&self) -> &MatrixForm {
        &self.form
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    /// `max |A(x)(0)|` over base points and components.
    pub fn basedness_defect(&self) -> Result<f64> {
        let axis = loop_axis_of(self.form.mesh())?;
        Ok(self.form.slice(axis, 0)?.max_abs())
    }

    pub fn is_based(&self) -> Result<bool> {
        Ok(self.basedness_defect()? <= TOL_BASED_FIELD)
    }

    /// `F = dA + 1/2 [A, A]` with `d` along the base only; theta is a value label.
    pub fn curvature(&self) -> Result<MatrixForm> {
        let mask = base_mask(self.form.mesh());
        self.form.d_along(mask).axpy(C64::new(0.5, 0.0), &self.form.bracket(&self.form)?)
    }
}

/// An `L g`-valued function on the base: a 0-form on the loop mesh.
#[derive(Clone, Debug)]
pub struct HiggsField {
    spec: GroupSpec,
    field: MatrixForm,
}

impl HiggsField {
    pub fn new(spec: GroupSpec, field: MatrixForm) -> Result<Self> {
        loop_axis_of(field.mesh())?;
        if field.degree() != 0 {
            return Err(Error::DegreeMismatch { expected: 0, found: field.degree() });
        }
        check_algebra(&field, &spec, "Higgs field")?;
        Ok(HiggsField { spec, field })
    }

    pub fn from_loops(base: &Mesh, loops: &[SampledLoop]) -> Result<Self> {
        let first = loops.first().ok_or_else(|| Error::Validation("no loops given".into()))?;
        if loops.len() != base.len() {
            return Err(Error::SampleCountMismatch { left: loops.len(), right: base.len() });
        }
        let mesh = loop_mesh(base, first.len())?;
        let spec = first.spec();
        let mut data = Vec::new();
        for l in loops {
            if !l.is_algebra() || l.spec() != spec || l.len() != first.len() {
                return Err(Error::Validation("Higgs loops must be algebra-valued with a shared spec and N".into()));
            }
            data.extend_from_slice(l.samples());
        }
        HiggsField::new(spec, MatrixForm::from_components(&mesh, 0, spec.rank, [(vec![], data)])?)
    }

    pub fn field(&self) -> &MatrixForm {
        &self.field
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn loops(&self) -> Result<Vec<SampledLoop>> {
        let mesh = self.field.mesh();
        let nt = mesh.factor(mesh.dim() - 1).len();
        let nn = self.spec.rank * self.spec.rank;
        let data = self.field.component_or_zero(0);
        data.chunks(nt * nn).map(|c| SampledLoop::algebra(self.spec, c.to_vec())).collect()
    }

    /// `(1 - s) self + s other`, again a Higgs field.
    pub fn convex_combination(&self, other: &HiggsField, s: f64) -> Result<HiggsField> {
        let f = self.field.scale_real(1.0 - s).axpy(C64::new(s, 0.0), &other.field)?;
        HiggsField::new(self.spec, f)
    }
}

/// A connection and Higgs field on the same trivialized loop bundle.
#[derive(Clone, Debug)]
pub struct GaugePair {
    conn: Connection,
    higgs: HiggsField,
}

impl GaugePair {
    pub fn new(conn: Connection, higgs: HiggsField) -> Result<Self> {
        if !conn.form.same_mesh(&higgs.field) {
            return Err(Error::MeshMismatch);
        }
        if conn.spec != higgs.spec {
            return Err(Error::Validation("connection and Higgs field have different group specs".into()));
        }
        Ok(GaugePair { conn, higgs })
    }

    /// Pair from raw forms, validating both.
    pub fn from_forms(spec: GroupSpec, conn: MatrixForm, higgs: MatrixForm) -> Result<Self> {
        GaugePair::new(Connection::new(spec, conn)?, HiggsField::new(spec, higgs)?)
    }

    pub fn zero(base: &Mesh, n_theta: usize, spec: GroupSpec) -> Result<Self> {
        let mesh = loop_mesh(base, n_theta)?;
        GaugePair::from_forms(spec, MatrixForm::zero(&mesh, 1, spec.rank)?, MatrixForm::zero(&mesh, 0, spec.rank)?)
    }

    pub fn connection(&self) -> &Connection {
        &self.conn
    }

    pub fn higgs(&self) -> &HiggsField {
        &self.higgs
    }

    pub fn spec(&self) -> GroupSpec {
        self.conn.spec
    }

    /// The loop mesh `base x Circle(N)`.
    pub fn mesh(&self) -> &Arc<Mesh> {
        self.conn.form.mesh()
    }

    pub fn loop_axis(&self) -> usize {
        self.mesh().dim() - 1
    }

    pub fn base_mesh(&self) -> Result<Arc<Mesh>> {
        Ok(Arc::new(self.mesh().remove_axis(self.loop_axis())?))
    }

    pub fn theta_samples(&self) -> usize {
        self.mesh().factor(self.loop_axis()).len()
    }

    /// `nabla Phi = d Phi + [A, Phi] - d_theta A`.
    pub fn higgs_cov_derivative(&self) -> Result<MatrixForm> {
        let a = &self.conn.form;
        let phi = &self.higgs.field;
        let d_phi = phi.d_along(base_mask(self.mesh()));
        d_phi.add(&a.bracket(phi)?)?.sub(&a.partial(self.loop_axis())?)
    }

    /// The caloron transform `A + Phi d(theta)` on the loop mesh.
    pub fn caloron_transform(&self) -> Result<MatrixForm> {
        let dth = MatrixForm::coordinate_differential(self.mesh(), self.loop_axis())?;
        self.conn.form.add(&self.higgs.field.wedge(&dth)?)
    }

    /// Inverse of the caloron transform for a 1-form whose last mesh axis is the loop circle.
    pub fn inverse_caloron_transform(spec: GroupSpec, a: &MatrixForm) -> Result<GaugePair> {
        let axis = loop_axis_of(a.mesh())?;
        if a.degree() != 1 {
            return Err(Error::DegreeMismatch { expected: 1, found: a.degree() });
        }
        let (conn, phi) = a.split_axis(axis)?;
        GaugePair::from_forms(spec, conn, phi)
    }

    /// Based gauge action `A -> ad(g^{-1}) A + g^{-1} dg`, `Phi -> ad(g^{-1}) Phi + g^{-1} d_theta g`.
    /// Returns the transformed pair and the skew-projection defect removed.
    pub fn gauge_transform(&self, gamma: &GroupMap) -> Result<(GaugePair, f64)> {
        if !gamma.values.same_mesh(&self.conn.form) {
            return Err(Error::MeshMismatch);
        }
        let defect = gamma.basedness_defect()?;
        if defect > TOL_BASED_FIELD {
            return Err(Error::NonBasedGauge { defect });
        }
        let inv = gamma.inverse()?;
        let g = gamma.values();
        let gi = inv.values();
        let mc = gamma.mc_pullback(Side::Left)?;
        let (mc_base, mc_theta) = mc.split_axis(self.loop_axis())?;
        let conn = gi.wedge(&self.conn.form)?.wedge(g)?.add(&mc_base)?;
        let phi = gi.wedge(&self.higgs.field)?.wedge(g)?.add(&mc_theta)?;
        let (conn, phi, worst) = if self.spec().is_compact() {
            let (c, d1) = conn.skew_projected();
            let (p, d2) = phi.skew_projected();
            (c, p, d1.max(d2))
        } else {
            (conn, phi, 0.0)
        };
        Ok((GaugePair::from_forms(self.spec(), conn, phi)?, worst))
    }

    /// Block sum of connections and Higgs fields.
    pub fn block_sum(&self, other: &GaugePair) -> Result<GaugePair> {
        let spec = self.spec().block_sum(&other.spec());
        GaugePair::from_forms(
            spec,
            self.conn.form.block_sum(&other.conn.form)?,
            self.higgs.field.block_sum(&other.higgs.field)?,
        )
    }

    /// `(1 - t) self + t other`.
    pub fn affine(&self, other: &GaugePair, t: f64) -> Result<GaugePair> {
        let c = self.conn.form.scale_real(1.0 - t).axpy(C64::new(t, 0.0), &other.conn.form)?;
        let h = self.higgs.field.scale_real(1.0 - t).axpy(C64::new(t, 0.0), &other.higgs.field)?;
        GaugePair::from_forms(self.spec(), c, h)
    }

    /// Scales both entries by `s`.
    pub fn scale(&self, s: f64) -> Result<GaugePair> {
        GaugePair::from_forms(self.spec(), self.conn.form.scale_real(s), self.higgs.field.scale_real(s))
    }

    pub fn distance(&self, other: &GaugePair) -> Result<f64> {
        Ok(self.conn.form.distance(&other.conn.form)?.max(self.higgs.field.distance(&other.higgs.field)?))
    }
}

#[derive(Serialize, Deserialize)]
struct PairWire {
    mesh: Mesh,
    spec: GroupSpec,
    connection: MatrixForm,
    higgs: Vec<SampledLoop>,
}

impl Serialize for GaugePair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        let base = self.base_mesh().map_err(S::Error::custom)?;
        let higgs = self.higgs.loops().map_err(S::Error::custom)?;
        PairWire { mesh: (*base).clone(), spec: self.spec(), connection: self.conn.form.clone(), higgs }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaugePair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = PairWire::deserialize(d)?;
        let build = || -> Result<GaugePair> {
            let higgs = HiggsField::from_loops(&w.mesh, &w.higgs)?;
            if higgs.spec != w.spec {
                return Err(Error::Validation("Higgs loops disagree with the pair's group spec".into()));
            }
            if **w.connection.mesh() != **higgs.field.mesh() {
                return Err(Error::MeshMismatch);
            }
            let conn = MatrixForm::from_raw(
                higgs.field.mesh().clone(),
                w.connection.degree(),
                w.connection.rank(),
                w.connection.raw_parts().3.clone(),
            );
            GaugePair::new(Connection::new(w.spec, conn)?, higgs)
        };
        build().map_err(D::Error::custom)
    }
}
