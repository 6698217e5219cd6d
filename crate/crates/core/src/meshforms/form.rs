use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::mesh::{Factor, Mesh};
use crate::error::{Error, Result};
use crate::linalg::{self, C64, ZERO};
use crate::spectral;

/// Bitmask of the mesh axes in a canonical (increasing) index set.
pub type Axes = u32;

pub fn axes_mask(axes: &[usize]) -> Axes {
    axes.iter().fold(0, |m, &a| m | (1 << a))
}

pub fn mask_axes(mask: Axes) -> Vec<usize> {
    (0..32).filter(|a| mask & (1 << a) != 0).collect()
}

/// `(-1)^{#{(i, j) : i in a, j in b, i > j}}`, the sign of sorting `dx^a ^ dx^b`.
pub fn shuffle_sign(a: Axes, b: Axes) -> f64 {
    let mut inversions = 0;
    for j in mask_axes(b) {
        inversions += (a >> (j + 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Matrix-valued differential form on a chart grid.
///
/// Only canonical components are stored; a missing component is zero. Each
/// component is a grid of `n x n` matrices, one per mesh point, concatenated.
#[derive(Clone, Debug)]
pub struct MatrixForm {
    mesh: Arc<Mesh>,
    degree: usize,
    n: usize,
    comps: BTreeMap<Axes, Vec<C64>>,
}

impl MatrixForm {
    pub fn zero(mesh: &Arc<Mesh>, degree: usize, n: usize) -> Result<Self> {
        if degree > mesh.dim() {
            return Err(Error::DegreeMismatch { expected: mesh.dim(), found: degree });
        }
        Ok(MatrixForm { mesh: mesh.clone(), degree, n, comps: BTreeMap::new() })
    }

    /// Matrix-valued 0-form sampled from `f(coordinates)`.
    pub fn function(mesh: &Arc<Mesh>, n: usize, f: impl Fn(&[f64]) -> Vec<C64>) -> Self {
        let mut data = Vec::with_capacity(mesh.len() * n * n);
        for x in mesh.points() {
            let v = f(&x);
            assert_eq!(v.len(), n * n, "function returned a matrix of the wrong size");
            data.extend(v);
        }
        let mut comps = BTreeMap::new();
        comps.insert(0, data);
        MatrixForm { mesh: mesh.clone(), degree: 0, n, comps }
    }

    pub fn scalar_function(mesh: &Arc<Mesh>, f: impl Fn(&[f64]) -> C64) -> Self {
        MatrixForm::function(mesh, 1, |x| vec![f(x)])
    }

    pub fn constant(mesh: &Arc<Mesh>, n: usize, value: &[C64]) -> Self {
        MatrixForm::function(mesh, n, |_| value.to_vec())
    }

    /// The scalar 0-form `1`.
    pub fn unit(mesh: &Arc<Mesh>) -> Self {
        MatrixForm::constant(mesh, 1, &[linalg::ONE])
    }

    /// Scalar 1-form `dx^axis`.
    pub fn coordinate_differential(mesh: &Arc<Mesh>, axis: usize) -> Result<Self> {
        mesh.check_axis(axis)?;
        let mut f = MatrixForm::zero(mesh, 1, 1)?;
        f.comps.insert(1 << axis, vec![linalg::ONE; mesh.len()]);
        Ok(f)
    }

    pub fn from_components(
        mesh: &Arc<Mesh>,
        degree: usize,
        n: usize,
        components: impl IntoIterator<Item = (Vec<usize>, Vec<C64>)>,
    ) -> Result<Self> {
        let mut f = MatrixForm::zero(mesh, degree, n)?;
        for (axes, data) in components {
            f.set_component(&axes, data)?;
        }
        Ok(f)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Matrix size of the values.
    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> impl Iterator<Item = (Axes, &[C64])> {
        self.comps.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    pub fn component(&self, axes: &[usize]) -> Option<&[C64]> {
        self.comps.get(&axes_mask(axes)).map(Vec::as_slice)
    }

    pub fn component_mask(&self, mask: Axes) -> Option<&[C64]> {
        self.comps.get(&mask).map(Vec::as_slice)
    }

    /// Component data, zeros when not stored.
    pub fn component_or_zero(&self, mask: Axes) -> Vec<C64> {
        self.comps.get(&mask).cloned().unwrap_or_else(|| vec![ZERO; self.grid_len()])
    }

    pub fn set_component(&mut self, axes: &[usize], data: Vec<C64>) -> Result<()> {
        if axes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!("component {axes:?} is not strictly increasing")));
        }
        if axes.len() != self.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: axes.len() });
        }
        for &a in axes {
            self.mesh.check_axis(a)?;
        }
        self.set_component_mask(axes_mask(axes), data)
    }

    fn set_component_mask(&mut self, mask: Axes, data: Vec<C64>) -> Result<()> {
        if data.len() != self.grid_len() {
            return Err(Error::SampleCountMismatch { left: data.len(), right: self.grid_len() });
        }
        self.comps.insert(mask, data);
        Ok(())
    }

    fn grid_len(&self) -> usize {
        self.mesh.len() * self.n * self.n
    }

    fn accumulate(&mut self, mask: Axes, data: &[C64], s: C64) {
        let len = self.grid_len();
        let slot = self.comps.entry(mask).or_insert_with(|| vec![ZERO; len]);
        for (o, v) in slot.iter_mut().zip(data) {
            *o += v * s;
        }
    }

    pub fn same_mesh(&self, other: &MatrixForm) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh
    }

    fn check_compatible(&self, other: &MatrixForm) -> Result<()> {
        if !self.same_mesh(other) {
            return Err(Error::MeshMismatch);
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &MatrixForm) -> Result<()> {
        self.check_compatible(other)?;
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("value rank {} vs {}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn add(&self, other: &MatrixForm) -> Result<MatrixForm> {
        self.axpy(linalg::ONE, other)
    }

    pub fn sub(&self, other: &MatrixForm) -> Result<MatrixForm> {
        self.axpy(-linalg::ONE, other)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: C64, other: &MatrixForm) -> Result<MatrixForm> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (m, d) in &other.comps {
            out.accumulate(*m, d, s);
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> MatrixForm {
        let mut out = self.clone();
        for d in out.comps.values_mut() {
            d.iter_mut().for_each(|z| *z *= s);
        }
        out
    }

    pub fn scale_real(&self, s: f64) -> MatrixForm {
        self.scale(C64::new(s, 0.0))
    }

    pub fn neg(&self) -> MatrixForm {
        self.scale_real(-1.0)
    }

    /// Largest entry modulus over all components and points.
    pub fn max_abs(&self) -> f64 {
        self.comps.values().fold(0.0, |m, d| m.max(linalg::max_abs(d)))
    }

    pub fn max_imag_abs(&self) -> f64 {
        self.comps.values().flatten().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// `max |self - other|`; errors if the shapes are incompatible.
    pub fn distance(&self, other: &MatrixForm) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.values().all(|d| d.iter().all(|z| *z == ZERO))
    }

    /// Applies `f` to the matrix at every point of every component.
    pub fn map_values(&self, new_n: usize, mut f: impl FnMut(&[C64]) -> Vec<C64>) -> MatrixForm {
        let nn = self.n * self.n;
        let mut comps = BTreeMap::new();
        for (m, d) in &self.comps {
            let mut out = Vec::with_capacity(d.len() / nn * new_n * new_n);
            for c in d.chunks(nn) {
                out.extend(f(c));
            }
            comps.insert(*m, out);
        }
        MatrixForm { mesh: self.mesh.clone(), degree: self.degree, n: new_n, comps }
    }

    pub fn trace(&self) -> MatrixForm {
        let n = self.n;
        self.map_values(1, |m| vec![linalg::trace(m, n)])
    }

    pub fn adjoint(&self) -> MatrixForm {
        let n = self.n;
        self.map_values(n, |m| linalg::adjoint(m, n))
    }

    /// Max pointwise `|X + X^*|`.
    pub fn skew_defect(&self) -> f64 {
        let nn = self.n * self.n;
        self.comps
            .values()
            .flat_map(|d| d.chunks(nn))
            .fold(0.0, |m, c| m.max(linalg::skew_defect(c, self.n)))
    }

    /// Skew-Hermitian projection together with the defect it removed.
    pub fn skew_projected(&self) -> (MatrixForm, f64) {
        let defect = self.skew_defect();
        let n = self.n;
        let out = self.map_values(n, |m| {
            let mut v = m.to_vec();
            linalg::skew_project(&mut v, n);
            v
        });
        (out, defect)
    }

    /// Embeds a scalar form as `value * I_n`.
    pub fn times_identity(&self, n: usize) -> Result<MatrixForm> {
        if self.n != 1 {
            return Err(Error::DimensionMismatch("only scalar forms embed as multiples of I".into()));
        }
        let id = linalg::identity(n);
        Ok(self.map_values(n, |v| id.iter().map(|z| z * v[0]).collect()))
    }

    /// Block-diagonal sum of two forms of equal degree.
    pub fn block_sum(&self, other: &MatrixForm) -> Result<MatrixForm> {
        self.check_compatible(other)?;
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        let (na, nb) = (self.n, other.n);
        let mut out = MatrixForm::zero(&self.mesh, self.degree, na + nb)?;
        let masks: std::collections::BTreeSet<Axes> = self.comps.keys().chain(other.comps.keys()).copied().collect();
        for m in masks {
            let a = self.component_or_zero(m);
            let b = other.component_or_zero(m);
            let data = a
                .chunks(na * na)
                .zip(b.chunks(nb * nb))
                .flat_map(|(x, y)| linalg::block_diag(x, na, y, nb))
                .collect();
            out.comps.insert(m, data);
        }
        Ok(out)
    }

    /// Exterior derivative.
    pub fn d(&self) -> MatrixForm {
        self.d_along(axes_mask(&(0..self.mesh.dim()).collect::<Vec<_>>()))
    }

    /// Exterior derivative using only the axes in `along`; the other axes are
    /// treated as parameters.
    pub fn d_along(&self, along: Axes) -> MatrixForm {
        let mut out = MatrixForm { mesh: self.mesh.clone(), degree: self.degree + 1, n: self.n, comps: BTreeMap::new() };
        if self.degree >= self.mesh.dim() {
            out.degree = self.degree + 1;
            return out;
        }
        for (mask, data) in &self.comps {
            for a in 0..self.mesh.dim() {
                if along & (1 << a) == 0 || mask & (1 << a) != 0 {
                    continue;
                }
                let deriv = self.partial_data(data, a);
                let sign = shuffle_sign(1 << a, *mask);
                out.accumulate(mask | (1 << a), &deriv, C64::new(sign, 0.0));
            }
        }
        out
    }

    /// Partial derivative of every component along `axis`, degree unchanged.
    pub fn partial(&self, axis: usize) -> Result<MatrixForm> {
        self.mesh.check_axis(axis)?;
        let mut out = self.clone();
        for d in out.comps.values_mut() {
            *d = self.partial_data(d, axis);
        }
        Ok(out)
    }

    fn partial_data(&self, data: &[C64], axis: usize) -> Vec<C64> {
        let mut out = data.to_vec();
        match self.mesh.factor(axis) {
            Factor::Circle { n } => {
                let mut lines = gather_lines(&self.mesh, axis, self.n * self.n, &out);
                spectral::differentiate_batch(&mut lines, n);
                scatter_lines(&self.mesh, axis, self.n * self.n, &lines, &mut out);
            }
            Factor::Interval { n } => {
                for_each_line(&self.mesh, axis, self.n * self.n, &mut out, |line| finite_difference(line, 1.0 / (n - 1) as f64))
            }
        }
        out
    }

    /// Wedge product with matrix multiplication of values. A scalar factor
    /// multiplies a matrix-valued one entrywise.
    pub fn wedge(&self, other: &MatrixForm) -> Result<MatrixForm> {
        self.check_compatible(other)?;
        let n = match (self.n, other.n) {
            (a, b) if a == b => a,
            (1, b) => b,
            (a, 1) => a,
            (a, b) => return Err(Error::DimensionMismatch(format!("value rank {a} vs {b}"))),
        };
        let degree = self.degree + other.degree;
        let mut out = MatrixForm { mesh: self.mesh.clone(), degree, n, comps: BTreeMap::new() };
        if degree > self.mesh.dim() {
            return Ok(out);
        }
        let npts = self.mesh.len();
        for (ma, da) in &self.comps {
            for (mb, db) in &other.comps {
                if ma & mb != 0 {
                    continue;
                }
                let s = C64::new(shuffle_sign(*ma, *mb), 0.0);
                let len = npts * n * n;
                let slot = out.comps.entry(ma | mb).or_insert_with(|| vec![ZERO; len]);
                pointwise_product(da, self.n, db, other.n, n, s, slot);
            }
        }
        Ok(out)
    }

    /// Graded commutator `[a, b] = a ^ b - (-1)^{pq} b ^ a`.
    pub fn bracket(&self, other: &MatrixForm) -> Result<MatrixForm> {
        let ab = self.wedge(other)?;
        let ba = other.wedge(self)?;
        let s = if (self.degree * other.degree) % 2 == 0 { -1.0 } else { 1.0 };
        ab.axpy(C64::new(s, 0.0), &ba)
    }

    /// Integral of a top-degree form, as an `n x n` matrix.
    pub fn integrate_top(&self) -> Result<Vec<C64>> {
        let dim = self.mesh.dim();
        if self.degree != dim {
            return Err(Error::DegreeMismatch { expected: dim, found: self.degree });
        }
        let nn = self.n * self.n;
        let mut out = vec![ZERO; nn];
        if let Some(d) = self.comps.get(&axes_mask(&(0..dim).collect::<Vec<_>>())) {
            for (w, m) in self.mesh.point_weights().iter().zip(d.chunks(nn)) {
                for (o, v) in out.iter_mut().zip(m) {
                    *o += v * w;
                }
            }
        }
        Ok(out)
    }

    pub fn integrate_top_scalar(&self) -> Result<C64> {
        if self.n != 1 {
            return Err(Error::DimensionMismatch("scalar integral of a matrix-valued form".into()));
        }
        Ok(self.integrate_top()?[0])
    }

    /// Integration over the fiber of the factor `axis`.
    ///
    /// A component `u dx^I` with `axis` in `I` is rewritten as `+-u dx^{I'} ^ dx^axis`
    /// and integrated along the factor; components without `dx^axis` drop out.
    /// The mesh density, if any, is folded into the fiber integral.
    pub fn fiber_integrate(&self, axis: usize) -> Result<MatrixForm> {
        self.mesh.check_axis(axis)?;
        if self.degree == 0 {
            return Err(Error::DegreeMismatch { expected: 1, found: 0 });
        }
        let mesh = Arc::new(self.mesh.remove_axis(axis)?);
        let mut out = MatrixForm { mesh, degree: self.degree - 1, n: self.n, comps: BTreeMap::new() };
        let weights = self.mesh.factor(axis).quadrature_weights();
        let bit = 1 << axis;
        for (mask, data) in &self.comps {
            if mask & bit == 0 {
                continue;
            }
            let after = (mask >> (axis + 1)).count_ones();
            let sign = if after % 2 == 0 { 1.0 } else { -1.0 };
            let weighted = self.apply_density(data);
            let reduced = reduce_axis(&self.mesh, axis, self.n * self.n, &weighted, &weights);
            out.accumulate(drop_axis(*mask, axis), &reduced, C64::new(sign, 0.0));
        }
        Ok(out)
    }

    /// Integrates the coefficient functions along `axis`, for forms with no
    /// `dx^axis` component. This is the integral over a circle factor of a
    /// form-valued function of that coordinate.
    pub fn integrate_along(&self, axis: usize) -> Result<MatrixForm> {
        self.mesh.check_axis(axis)?;
        let bit = 1 << axis;
        if self.comps.keys().any(|m| m & bit != 0) {
            return Err(Error::Validation(format!("form has components along axis {axis}")));
        }
        let mesh = Arc::new(self.mesh.remove_axis(axis)?);
        let mut out = MatrixForm { mesh, degree: self.degree, n: self.n, comps: BTreeMap::new() };
        let weights = self.mesh.factor(axis).quadrature_weights();
        for (mask, data) in &self.comps {
            let weighted = self.apply_density(data);
            let reduced = reduce_axis(&self.mesh, axis, self.n * self.n, &weighted, &weights);
            out.comps.insert(drop_axis(*mask, axis), reduced);
        }
        Ok(out)
    }

    fn apply_density(&self, data: &[C64]) -> Vec<C64> {
        match self.mesh.weight() {
            None => data.to_vec(),
            Some(w) => {
                let nn = self.n * self.n;
                data.iter().enumerate().map(|(i, z)| z * w[i / nn]).collect()
            }
        }
    }

    /// Pullback along the inclusion of the slice `x_axis = coordinate(index)`.
    pub fn slice(&self, axis: usize, index: usize) -> Result<MatrixForm> {
        self.mesh.check_axis(axis)?;
        let len = self.mesh.factor(axis).len();
        if index >= len {
            return Err(Error::Validation(format!("slice index {index} out of range {len}")));
        }
        let mesh = Arc::new(self.mesh.remove_axis(axis)?);
        let mut out = MatrixForm { mesh, degree: self.degree, n: self.n, comps: BTreeMap::new() };
        let bit = 1 << axis;
        let nn = self.n * self.n;
        let stride = self.mesh.strides()[axis] * nn;
        for (mask, data) in &self.comps {
            if mask & bit != 0 {
                continue;
            }
            let mut sliced = Vec::with_capacity(data.len() / len);
            for block in data.chunks(stride * len) {
                sliced.extend_from_slice(&block[index * stride..(index + 1) * stride]);
            }
            out.comps.insert(drop_axis(*mask, axis), sliced);
        }
        if out.degree > out.mesh.dim() {
            return Err(Error::DegreeMismatch { expected: out.mesh.dim(), found: out.degree });
        }
        Ok(out)
    }

    /// Pullback along the projection `M x F -> M` onto a mesh with `factor` appended.
    pub fn pullback_append(&self, factor: Factor) -> Result<MatrixForm> {
        let mesh = Arc::new(self.mesh.append(factor)?);
        self.pullback_onto(&mesh)
    }

    /// Pullback along the projection from `mesh`, which must be this form's
    /// mesh with one factor appended.
    pub fn pullback_onto(&self, mesh: &Arc<Mesh>) -> Result<MatrixForm> {
        let dim = self.mesh.dim();
        if mesh.dim() != dim + 1 || mesh.factors()[..dim] != *self.mesh.factors() {
            return Err(Error::MeshMismatch);
        }
        let m = mesh.factor(dim).len();
        let nn = self.n * self.n;
        let comps = self
            .comps
            .iter()
            .map(|(k, d)| {
                let mut v = Vec::with_capacity(d.len() * m);
                for c in d.chunks(nn) {
                    for _ in 0..m {
                        v.extend_from_slice(c);
                    }
                }
                (*k, v)
            })
            .collect();
        Ok(MatrixForm { mesh: mesh.clone(), degree: self.degree, n: self.n, comps })
    }

    /// Splits `self = w0 + w1 ^ dx^axis` with neither part containing `dx^axis`.
    pub fn split_axis(&self, axis: usize) -> Result<(MatrixForm, MatrixForm)> {
        self.mesh.check_axis(axis)?;
        let bit = 1 << axis;
        let mut w0 = MatrixForm { mesh: self.mesh.clone(), degree: self.degree, n: self.n, comps: BTreeMap::new() };
        let mut w1 = MatrixForm {
            mesh: self.mesh.clone(),
            degree: self.degree.saturating_sub(1),
            n: self.n,
            comps: BTreeMap::new(),
        };
        for (mask, data) in &self.comps {
            if mask & bit == 0 {
                w0.comps.insert(*mask, data.clone());
            } else {
                let rest = mask & !bit;
                let sign = shuffle_sign(rest, bit);
                w1.comps.insert(rest, linalg::scale(data, C64::new(sign, 0.0)));
            }
        }
        Ok((w0, w1))
    }

    /// Interior product with the constant vector field `sum_a v[a] d/dx^a`.
    pub fn contract(&self, v: &[f64]) -> Result<MatrixForm> {
        if v.len() != self.mesh.dim() {
            return Err(Error::DimensionMismatch(format!("vector of length {} on a {}-dimensional mesh", v.len(), self.mesh.dim())));
        }
        if self.degree == 0 {
            return Err(Error::DegreeMismatch { expected: 1, found: 0 });
        }
        let mut out = MatrixForm { mesh: self.mesh.clone(), degree: self.degree - 1, n: self.n, comps: BTreeMap::new() };
        for (mask, data) in &self.comps {
            for (r, a) in mask_axes(*mask).into_iter().enumerate() {
                if v[a] == 0.0 {
                    continue;
                }
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                out.accumulate(mask & !(1 << a), data, C64::new(sign * v[a], 0.0));
            }
        }
        Ok(out)
    }

    /// Drops every component containing `dx^axis`.
    pub fn without_axis(&self, axis: usize) -> MatrixForm {
        let bit = 1 << axis;
        let mut out = self.clone();
        out.comps.retain(|m, _| m & bit == 0);
        out
    }

    /// Values of the 0-form at grid point `p`.
    pub fn value_at(&self, p: usize) -> Result<Vec<C64>> {
        if self.degree != 0 {
            return Err(Error::DegreeMismatch { expected: 0, found: self.degree });
        }
        let nn = self.n * self.n;
        Ok(self.comps.get(&0).map_or(vec![ZERO; nn], |d| d[p * nn..(p + 1) * nn].to_vec()))
    }

    /// Periods over the coordinate cycles: for every set of `degree` circle
    /// axes, the integral of that component over the corresponding torus,
    /// evaluated at every position of the remaining axes. Returns the cycle
    /// axes together with the largest modulus found.
    pub fn periods(&self) -> Result<Vec<(Vec<usize>, Vec<C64>)>> {
        let circles = self.mesh.circle_axes();
        let mut out = Vec::new();
        for set in subsets(&circles, self.degree) {
            let mask = axes_mask(&set);
            let data = self.component_or_zero(mask);
            let mut f = MatrixForm { mesh: self.mesh.clone(), degree: 0, n: self.n, comps: BTreeMap::new() };
            f.comps.insert(0, data);
            for &a in set.iter().rev() {
                f = f.integrate_along(a)?;
            }
            out.push((set, f.component_or_zero(0)));
        }
        Ok(out)
    }

    /// Largest period modulus over every coordinate cycle.
    pub fn max_period(&self) -> Result<f64> {
        Ok(self.periods()?.iter().fold(0.0, |m, (_, v)| m.max(linalg::max_abs(v))))
    }

    pub(crate) fn raw_parts(&self) -> (&Arc<Mesh>, usize, usize, &BTreeMap<Axes, Vec<C64>>) {
        (&self.mesh, self.degree, self.n, &self.comps)
    }

    pub(crate) fn from_raw(mesh: Arc<Mesh>, degree: usize, n: usize, comps: BTreeMap<Axes, Vec<C64>>) -> Self {
        MatrixForm { mesh, degree, n, comps }
    }
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in subsets(&items[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

/// Removes bit `axis` and shifts the higher bits down.
fn drop_axis(mask: Axes, axis: usize) -> Axes {
    let low = mask & ((1 << axis) - 1);
    let high = (mask >> (axis + 1)) << axis;
    low | high
}

fn pointwise_product(a: &[C64], na: usize, b: &[C64], nb: usize, n: usize, s: C64, out: &mut [C64]) {
    let nn = n * n;
    let npts = out.len() / nn;
    for p in 0..npts {
        let o = &mut out[p * nn..(p + 1) * nn];
        match (na, nb) {
            (1, 1) => o[0] += a[p] * b[p] * s,
            (1, _) => {
                let c = a[p] * s;
                for (x, y) in o.iter_mut().zip(&b[p * nn..(p + 1) * nn]) {
                    *x += c * y;
                }
            }
            (_, 1) => {
                let c = b[p] * s;
                for (x, y) in o.iter_mut().zip(&a[p * nn..(p + 1) * nn]) {
                    *x += c * y;
                }
            }
            _ => linalg::mul_acc_scaled(&a[p * nn..(p + 1) * nn], &b[p * nn..(p + 1) * nn], s, o, n),
        }
    }
}

/// Calls `f` on every line of `data` running along `axis`. `inner` is the
/// number of scalars stored per grid point.
pub(crate) fn for_each_line(mesh: &Mesh, axis: usize, inner: usize, data: &mut [C64], mut f: impl FnMut(&mut [C64])) {
    let len = mesh.factor(axis).len();
    let stride = mesh.strides()[axis] * inner;
    let mut line = vec![ZERO; len];
    for block in data.chunks_mut(stride * len) {
        for offset in 0..stride {
            for (j, v) in line.iter_mut().enumerate() {
                *v = block[offset + j * stride];
            }
            f(&mut line);
            for (j, v) in line.iter().enumerate() {
                block[offset + j * stride] = *v;
            }
        }
    }
}

/// Copies every line along `axis` into a contiguous buffer, one line after another.
fn gather_lines(mesh: &Mesh, axis: usize, inner: usize, data: &[C64]) -> Vec<C64> {
    let len = mesh.factor(axis).len();
    let stride = mesh.strides()[axis] * inner;
    let mut out = Vec::with_capacity(data.len());
    for block in data.chunks(stride * len) {
        for offset in 0..stride {
            out.extend((0..len).map(|j| block[offset + j * stride]));
        }
    }
    out
}

fn scatter_lines(mesh: &Mesh, axis: usize, inner: usize, lines: &[C64], data: &mut [C64]) {
    let len = mesh.factor(axis).len();
    let stride = mesh.strides()[axis] * inner;
    let mut src = lines.chunks(len);
    for block in data.chunks_mut(stride * len) {
        for offset in 0..stride {
            for (j, v) in src.next().expect("line count").iter().enumerate() {
                block[offset + j * stride] = *v;
            }
        }
    }
}

/// Weighted sum along `axis`, producing data on the mesh without that axis.
fn reduce_axis(mesh: &Mesh, axis: usize, inner: usize, data: &[C64], weights: &[f64]) -> Vec<C64> {
    let len = mesh.factor(axis).len();
    let stride = mesh.strides()[axis] * inner;
    let mut out = Vec::with_capacity(data.len() / len);
    for block in data.chunks(stride * len) {
        for offset in 0..stride {
            let mut acc = ZERO;
            for (j, w) in weights.iter().enumerate() {
                acc += block[offset + j * stride] * w;
            }
            out.push(acc);
        }
    }
    out
}

/// Fourth-order finite differences on a uniform non-periodic line.
fn finite_difference(line: &mut [C64], h: f64) {
    let f = line.to_vec();
    let n = f.len();
    let c = 1.0 / (12.0 * h);
    const EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    const EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
    let dot = |coef: &[f64; 5], start: usize, dir: isize| -> C64 {
        coef.iter()
            .enumerate()
            .map(|(k, w)| f[(start as isize + dir * k as isize) as usize] * *w)
            .sum::<C64>()
    };
    line[0] = dot(&EDGE0, 0, 1) * c;
    line[1] = dot(&EDGE1, 0, 1) * c;
    line[n - 1] = -dot(&EDGE0, n - 1, -1) * c;
    line[n - 2] = -dot(&EDGE1, n - 1, -1) * c;
    for i in 2..n - 2 {
        line[i] = (f[i - 2] - f[i - 1] * 8.0 + f[i + 1] * 8.0 - f[i + 2]) * c;
    }
}

#[derive(Serialize, Deserialize)]
struct FormWire {
    mesh: Mesh,
    degree: usize,
    n: usize,
    components: BTreeMap<String, Vec<C64>>,
}

fn component_key(mask: Axes) -> String {
    let axes: Vec<String> = mask_axes(mask).iter().map(usize::to_string).collect();
    format!("({})", axes.join(","))
}

fn parse_component_key(key: &str) -> Result<Vec<usize>> {
    let inner = key
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::Validation(format!("bad component key {key:?}")))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Validation(format!("bad component key {key:?}"))))
        .collect()
}

impl Serialize for MatrixForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FormWire {
            mesh: (*self.mesh).clone(),
            degree: self.degree,
            n: self.n,
            components: self.comps.iter().map(|(m, d)| (component_key(*m), d.clone())).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = FormWire::deserialize(d)?;
        wire.mesh.validate().map_err(D::Error::custom)?;
        let mesh = Arc::new(wire.mesh);
        let comps = wire
            .components
            .into_iter()
            .map(|(k, v)| parse_component_key(&k).map(|axes| (axes, v)))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        MatrixForm::from_components(&mesh, wire.degree, wire.n, comps).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn torus(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::torus(&[n, n]).unwrap())
    }

    #[test]
    fn derivative_of_sine() {
        let m = Arc::new(Mesh::circle(32).unwrap());
        let f = MatrixForm::scalar_function(&m, |x| c(x[0].sin()));
        let expect = MatrixForm::scalar_function(&m, |x| c(x[0].cos()))
            .wedge(&MatrixForm::coordinate_differential(&m, 0).unwrap())
            .unwrap();
        assert!(f.d().distance(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn d_of_constant_vanishes() {
        let m = torus(8);
        assert!(MatrixForm::unit(&m).d().max_abs() < 1e-15);
    }

    #[test]
    fn dx_dy_antisymmetry() {
        let m = torus(8);
        let dx = MatrixForm::coordinate_differential(&m, 0).unwrap();
        let dy = MatrixForm::coordinate_differential(&m, 1).unwrap();
        let s = dx.wedge(&dy).unwrap().add(&dy.wedge(&dx).unwrap()).unwrap();
        assert!(s.max_abs() == 0.0);
        let vol = dx.wedge(&dy).unwrap().integrate_top_scalar().unwrap();
        assert!((vol - c(4.0 * PI * PI)).norm() < 1e-12);
    }

    #[test]
    fn interval_derivative_is_fourth_order() {
        let err = |n: usize| {
            let m = Arc::new(Mesh::new(vec![Factor::Interval { n }]).unwrap());
            let f = MatrixForm::scalar_function(&m, |x| c((2.0 * x[0]).exp()));
            let g = MatrixForm::scalar_function(&m, |x| c(2.0 * (2.0 * x[0]).exp()))
                .wedge(&MatrixForm::coordinate_differential(&m, 0).unwrap())
                .unwrap();
            f.d().distance(&g).unwrap()
        };
        let ratio = err(33) / err(65);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn fiber_integral_of_constant_fiber_integrand() {
        let m = Arc::new(Mesh::torus(&[16, 8]).unwrap());
        let u = MatrixForm::scalar_function(&m, |x| c(x[0].cos()));
        let w = u.wedge(&MatrixForm::coordinate_differential(&m, 1).unwrap()).unwrap();
        let f = w.fiber_integrate(1).unwrap();
        let base = Arc::new(Mesh::circle(16).unwrap());
        let expect = MatrixForm::scalar_function(&base, |x| c(2.0 * PI * x[0].cos()));
        assert!(f.distance(&expect).unwrap() < 1e-12);
        let v = u.wedge(&MatrixForm::coordinate_differential(&m, 0).unwrap()).unwrap();
        assert!(v.fiber_integrate(1).unwrap().is_zero());
    }

    #[test]
    fn fiber_sign_when_axis_is_first() {
        // dθ ^ dx integrated over θ gives -dx.
        let m = Arc::new(Mesh::torus(&[8, 8]).unwrap());
        let w = MatrixForm::coordinate_differential(&m, 0)
            .unwrap()
            .wedge(&MatrixForm::coordinate_differential(&m, 1).unwrap())
            .unwrap();
        let f = w.fiber_integrate(0).unwrap();
        assert!((f.component(&[0]).unwrap()[0] - c(-2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn split_and_slice() {
        let m = Arc::new(Mesh::torus(&[8, 16]).unwrap());
        let u = MatrixForm::scalar_function(&m, |x| c(x[0].sin() + x[1].cos()));
        let dth = MatrixForm::coordinate_differential(&m, 0).unwrap();
        let dy = MatrixForm::coordinate_differential(&m, 1).unwrap();
        let w = dth.wedge(&dy).unwrap().wedge(&u).unwrap();
        let (w0, w1) = w.split_axis(0).unwrap();
        assert!(w0.is_zero());
        let back = w1.wedge(&dth).unwrap();
        assert!(back.distance(&w).unwrap() < 1e-15);
        let s = u.slice(0, 3).unwrap();
        let x0 = 2.0 * PI * 3.0 / 8.0;
        let expect = MatrixForm::scalar_function(s.mesh(), |y| c(x0.sin() + y[0].cos()));
        assert!(s.distance(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let m = torus(8);
        let u = MatrixForm::scalar_function(&m, |x| C64::new(x[0].sin(), x[1]));
        let w = u.wedge(&MatrixForm::coordinate_differential(&m, 1).unwrap()).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert!(s.contains("\"(1)\""));
        let back: MatrixForm = serde_json::from_str(&s).unwrap();
        assert!(back.distance(&w).unwrap() == 0.0);
    }

    #[test]
    fn periods_of_coordinate_forms() {
        let m = torus(8);
        let dx = MatrixForm::coordinate_differential(&m, 0).unwrap();
        let p = dx.periods().unwrap();
        assert_eq!(p.len(), 2);
        assert!((p[0].1[0] - c(2.0 * PI)).norm() < 1e-12);
        assert!(linalg::max_abs(&p[1].1) == 0.0);
    }
}
