//! Cutoff functions, beta integrals and the degree-1 character of a Higgs field.

use std::f64::consts::PI;

use crate::coefficients;
use crate::error::{Error, Result};
use crate::gauge::HiggsField;
use crate::quadrature;

/// Smooth `alpha: [0, 2 pi] -> R` with `alpha(0) = 0`, `alpha(2 pi) = 1`, and its derivative.
#[derive(Clone, Copy)]
pub struct CutoffFunction {
    name: &'static str,
    alpha: fn(f64) -> f64,
    derivative: fn(f64) -> f64,
}

impl std::fmt::Debug for CutoffFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CutoffFunction").field("name", &self.name).finish()
    }
}

impl CutoffFunction {
    pub fn new(name: &'static str, alpha: fn(f64) -> f64, derivative: fn(f64) -> f64) -> Result<Self> {
        let c = CutoffFunction { name, alpha, derivative };
        if (c.value(0.0)).abs() > 1e-14 || (c.value(2.0 * PI) - 1.0).abs() > 1e-14 {
            return Err(Error::Validation(format!("cutoff {name} must run from 0 to 1")));
        }
        Ok(c)
    }

    /// `theta / 2 pi`
    pub fn linear() -> Self {
        CutoffFunction { name: "linear", alpha: |t| t / (2.0 * PI), derivative: |_| 1.0 / (2.0 * PI) }
    }

    /// `(1 - cos(theta / 2)) / 2`
    pub fn cosine() -> Self {
        CutoffFunction {
            name: "cosine",
            alpha: |t| (1.0 - (t / 2.0).cos()) / 2.0,
            derivative: |t| (t / 2.0).sin() / 4.0,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn value(&self, theta: f64) -> f64 {
        (self.alpha)(theta)
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        (self.derivative)(theta)
    }

    /// `(theta, alpha, alpha')` at the given points.
    pub fn samples(&self, thetas: &[f64]) -> Vec<(f64, f64, f64)> {
        thetas.iter().map(|&t| (t, self.value(t), self.derivative(t))).collect()
    }
}

/// `integral_0^{2 pi} alpha^{k-1} (1 - alpha)^{k-1} alpha' d theta` by Gauss–Legendre,
/// returned with its distance to `B(k, k)`.
pub fn beta_quadrature(k: usize, alpha: &CutoffFunction, nodes: usize) -> Result<(f64, f64)> {
    let exact = coefficients::to_f64(&coefficients::beta_kk(k)?);
    let (x, w) = quadrature::gauss_legendre_on(nodes, 0.0, 2.0 * PI);
    let value: f64 = x
        .iter()
        .zip(&w)
        .map(|(&t, &wt)| {
            let a = alpha.value(t);
            wt * (a * (1.0 - a)).powi(k as i32 - 1) * alpha.derivative(t)
        })
        .sum();
    Ok((value, (value - exact).abs()))
}

/// Representative of `r mod 1` in `[-1/2, 1/2)`. Values within `1e-12` below
/// `1/2` are taken to `-1/2`.
pub fn reduce_mod_one(r: f64) -> f64 {
    let m = r - (r + 0.5).floor();
    if m > 0.5 - 1e-12 {
        m - 1.0
    } else {
        m
    }
}

/// Distance between two classes in `R/Z`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    (((a - b) + 0.5).rem_euclid(1.0) - 0.5).abs()
}

/// `(1/2 pi i) integral_{S^1} tr Phi` mod 1 at every base point.
pub fn degree1_character(phi: &HiggsField) -> Result<Vec<f64>> {
    let field = phi.field();
    let axis = field.mesh().dim() - 1;
    let raw = field.trace().integrate_along(axis)?.component_or_zero(0);
    Ok(raw.iter().map(|z| reduce_mod_one(z.im / (2.0 * PI))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_cutoff_gives_beta() {
        for k in 1..=6 {
            let (_, err) = beta_quadrature(k, &CutoffFunction::linear(), 32).unwrap();
            assert!(err < 1e-14, "k={k}");
        }
    }

    #[test]
    fn cosine_cutoff_gives_beta() {
        let (v, err) = beta_quadrature(4, &CutoffFunction::cosine(), 48).unwrap();
        assert!(err < 1e-12, "{v}");
    }

    #[test]
    fn custom_cutoff_endpoints_checked() {
        assert!(CutoffFunction::new("bad", |t| t, |_| 1.0).is_err());
        assert!(CutoffFunction::new("square", |t| (t / (2.0 * PI)).powi(2), |t| t / (2.0 * PI * PI)).is_ok());
    }

    #[test]
    fn reduction_convention() {
        assert_eq!(reduce_mod_one(0.5), -0.5);
        assert_eq!(reduce_mod_one(-0.5), -0.5);
        assert_eq!(reduce_mod_one(3.0), 0.0);
        assert!((reduce_mod_one(1.25) - 0.25).abs() < 1e-15);
        assert!(circle_distance(0.49, -0.49).abs() < 0.02 + 1e-15);
    }
}
