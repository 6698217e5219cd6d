use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// One factor of a product chart grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Factor {
    /// Periodic coordinate on `[0, 2 pi)`, `n` uniform samples, `n` a power of two.
    Circle { n: usize },
    /// Coordinate on `[0, 1]`, `n` uniform samples including both endpoints.
    Interval { n: usize },
}

impl Factor {
    pub fn len(&self) -> usize {
        match *self {
            Factor::Circle { n } | Factor::Interval { n } => n,
        }
    }

    pub fn is_circle(&self) -> bool {
        matches!(self, Factor::Circle { .. })
    }

    pub fn coordinates(&self) -> Vec<f64> {
        match *self {
            Factor::Circle { n } => (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect(),
            Factor::Interval { n } => quadrature::interval_nodes(n),
        }
    }

    pub fn quadrature_weights(&self) -> Vec<f64> {
        match *self {
            Factor::Circle { n } => quadrature::circle_weights(n),
            Factor::Interval { n } => quadrature::interval_weights(n, quadrature::INTERVAL_GL_NODES),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.len();
        if n < 8 {
            return Err(Error::InvalidMesh(format!("factor {self:?} has fewer than 8 samples")));
        }
        if self.is_circle() && !n.is_power_of_two() {
            return Err(Error::InvalidMesh(format!("circle factor with {n} samples is not a power of two")));
        }
        Ok(())
    }
}

/// A product grid standing in for a compact base manifold, oriented by factor order.
///
/// Points are laid out row-major with the last factor varying fastest.
/// The optional weight is an integration density sampled at every point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    factors: Vec<Factor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<Vec<f64>>,
}

impl Mesh {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.len() > 16 {
            return Err(Error::InvalidMesh("at most 16 factors are supported".into()));
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(Mesh { factors, weight: None })
    }

    /// Torus `T^d` with the given per-axis sample counts.
    pub fn torus(sizes: &[usize]) -> Result<Self> {
        Mesh::new(sizes.iter().map(|&n| Factor::Circle { n }).collect())
    }

    pub fn circle(n: usize) -> Result<Self> {
        Mesh::torus(&[n])
    }

    /// Attaches an integration density. Negative values are rejected, as are
    /// zeros away from the boundary of interval factors.
    pub fn with_weight(mut self, weight: Vec<f64>) -> Result<Self> {
        if weight.len() != self.len() {
            return Err(Error::InvalidMesh(format!(
                "weight has {} samples, mesh has {}",
                weight.len(),
                self.len()
            )));
        }
        for (p, w) in weight.iter().enumerate() {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidMesh(format!("weight {w} at point {p}")));
            }
            if *w == 0.0 && !self.on_interval_boundary(p) {
                return Err(Error::InvalidMesh(format!("weight vanishes at interior point {p}")));
            }
        }
        self.weight = Some(weight);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for f in &self.factors {
            f.validate()?;
        }
        if let Some(w) = &self.weight {
            Mesh { factors: self.factors.clone(), weight: None }.with_weight(w.clone())?;
        }
        Ok(())
    }

    fn on_interval_boundary(&self, p: usize) -> bool {
        let idx = self.multi_index(p);
        self.factors
            .iter()
            .zip(&idx)
            .any(|(f, &i)| matches!(f, Factor::Interval { n } if i == 0 || i + 1 == *n))
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, axis: usize) -> Factor {
        self.factors[axis]
    }

    pub fn weight(&self) -> Option<&[f64]> {
        self.weight.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.factors.iter().map(Factor::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(Factor::len).collect()
    }

    /// Point stride of each axis.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for a in (0..self.dim().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.factors[a + 1].len();
        }
        s
    }

    pub fn multi_index(&self, mut p: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            let n = self.factors[a].len();
            idx[a] = p % n;
            p /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.factors).fold(0, |acc, (i, f)| acc * f.len() + i)
    }

    pub fn axis_coordinates(&self, axis: usize) -> Vec<f64> {
        self.factors[axis].coordinates()
    }

    /// Coordinates of every point, `dim` values per point.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let coords: Vec<Vec<f64>> = (0..self.dim()).map(|a| self.axis_coordinates(a)).collect();
        (0..self.len())
            .map(|p| self.multi_index(p).iter().enumerate().map(|(a, &i)| coords[a][i]).collect())
            .collect()
    }

    pub fn circle_axes(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&a| self.factors[a].is_circle()).collect()
    }

    /// Mesh with `factor` appended as the last axis; the weight is repeated along it.
    pub fn append(&self, factor: Factor) -> Result<Mesh> {
        factor.validate()?;
        let mut factors = self.factors.clone();
        factors.push(factor);
        let weight = self
            .weight
            .as_ref()
            .map(|w| w.iter().flat_map(|&v| std::iter::repeat(v).take(factor.len())).collect());
        Ok(Mesh { factors, weight })
    }

    /// Mesh with `axis` removed. The weight is dropped: it is a density on the
    /// full product and is consumed by whatever integrates the axis away.
    pub fn remove_axis(&self, axis: usize) -> Result<Mesh> {
        self.check_axis(axis)?;
        let mut factors = self.factors.clone();
        factors.remove(axis);
        Ok(Mesh { factors, weight: None })
    }

    pub fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim() {
            Err(Error::InvalidAxis { axis, dim: self.dim() })
        } else {
            Ok(())
        }
    }

    /// Full tensor-product quadrature weight of each point, including the density.
    pub fn point_weights(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = self.factors.iter().map(Factor::quadrature_weights).collect();
        (0..self.len())
            .map(|p| {
                let idx = self.multi_index(p);
                let w: f64 = idx.iter().enumerate().map(|(a, &i)| per_axis[a][i]).product();
                w * self.weight.as_ref().map_or(1.0, |d| d[p])
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_non_power_of_two_circles() {
        assert!(Mesh::torus(&[4]).is_err());
        assert!(Mesh::torus(&[12]).is_err());
        assert!(Mesh::new(vec![Factor::Interval { n: 12 }]).is_ok());
    }

    #[test]
    fn index_round_trip() {
        let m = Mesh::new(vec![Factor::Circle { n: 8 }, Factor::Interval { n: 9 }, Factor::Circle { n: 16 }]).unwrap();
        for p in [0, 1, 17, 500, m.len() - 1] {
            assert_eq!(m.flat_index(&m.multi_index(p)), p);
        }
        assert_eq!(m.strides(), vec![9 * 16, 16, 1]);
    }

    #[test]
    fn weight_must_be_positive_inside() {
        let m = Mesh::new(vec![Factor::Interval { n: 8 }]).unwrap();
        let mut w = vec![1.0; 8];
        w[0] = 0.0;
        assert!(m.clone().with_weight(w.clone()).is_ok());
        w[3] = 0.0;
        assert!(m.with_weight(w).is_err());
    }

    #[test]
    fn total_weight_is_volume() {
        let m = Mesh::new(vec![Factor::Circle { n: 8 }, Factor::Interval { n: 17 }]).unwrap();
        let v: f64 = m.point_weights().iter().sum();
        assert!((v - 2.0 * PI).abs() < 1e-12);
    }
}
