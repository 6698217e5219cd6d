//! Chart-grid meshes and matrix-valued differential forms on them.

mod form;
mod mesh;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use form::{axes_mask, mask_axes, shuffle_sign, Axes, MatrixForm};
pub use mesh::{Factor, Mesh};

use crate::error::{Error, Result};

/// Sum of scalar forms of several degrees, keyed by degree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradedForm {
    parts: BTreeMap<usize, MatrixForm>,
}

impl GradedForm {
    pub fn new() -> Self {
        GradedForm { parts: BTreeMap::new() }
    }

    pub fn from_parts(parts: impl IntoIterator<Item = MatrixForm>) -> Result<Self> {
        let mut g = GradedForm::new();
        for p in parts {
            g.add_part(p)?;
        }
        Ok(g)
    }

    /// Adds `form` into the part of its degree.
    pub fn add_part(&mut self, form: MatrixForm) -> Result<()> {
        let deg = form.degree();
        let merged = match self.parts.remove(&deg) {
            Some(existing) => existing.add(&form)?,
            None => form,
        };
        self.parts.insert(deg, merged);
        Ok(())
    }

    pub fn part(&self, degree: usize) -> Option<&MatrixForm> {
        self.parts.get(&degree)
    }

    pub fn parts(&self) -> impl Iterator<Item = (usize, &MatrixForm)> {
        self.parts.iter().map(|(k, v)| (*k, v))
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.parts.keys().copied().collect()
    }

    pub fn mesh(&self) -> Option<&Arc<Mesh>> {
        self.parts.values().next().map(MatrixForm::mesh)
    }

    fn combine(&self, other: &GradedForm, s: f64) -> Result<GradedForm> {
        let mut out = self.clone();
        for f in other.parts.values() {
            out.add_part(f.scale_real(s))?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &GradedForm) -> Result<GradedForm> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &GradedForm) -> Result<GradedForm> {
        self.combine(other, -1.0)
    }

    pub fn neg(&self) -> GradedForm {
        GradedForm { parts: self.parts.iter().map(|(k, v)| (*k, v.neg())).collect() }
    }

    /// Degreewise exterior derivative. Parts of top degree are dropped.
    pub fn d(&self) -> Result<GradedForm> {
        let mut out = GradedForm::new();
        for f in self.parts.values() {
            if f.degree() < f.mesh().dim() {
                out.add_part(f.d())?;
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.parts.values().fold(0.0, |m, f| m.max(f.max_abs()))
    }

    pub fn max_imag_abs(&self) -> f64 {
        self.parts.values().fold(0.0, |m, f| m.max(f.max_imag_abs()))
    }

    /// Largest sup-norm difference over the union of degrees.
    pub fn distance(&self, other: &GradedForm) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn max_period(&self) -> Result<f64> {
        self.parts.values().try_fold(0.0, |m, f| Ok(f64::max(m, f.max_period()?)))
    }

    pub fn only_degrees(&self, parity_even: bool) -> Result<()> {
        match self.parts.keys().find(|d| (*d % 2 == 0) != parity_even) {
            Some(d) => Err(Error::Validation(format!("unexpected part of degree {d}"))),
            None => Ok(()),
        }
    }
}

impl Default for GradedForm {
    fn default() -> Self {
        GradedForm::new()
    }
}
