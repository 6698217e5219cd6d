//! Sampled loops in matrix groups and their Lie algebras.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64, ZERO};
use crate::spectral;

/// Residual tolerance for algebraic identities on loop samples.
pub const TOL_ALG: f64 = 1e-10;
/// Default tolerance for the distance of a winding quadrature to an integer.
pub const TOL_INT: f64 = 1e-6;
/// Tolerance for `gamma(0) = I` on based loops.
pub const TOL_BASED: f64 = 1e-12;
pub const DEFAULT_SAMPLES: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupFamily {
    #[serde(rename = "U")]
    Unitary,
    #[serde(rename = "GL")]
    GeneralLinear,
    #[serde(rename = "SU")]
    SpecialUnitary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub family: GroupFamily,
    pub rank: usize,
}

impl GroupSpec {
    pub fn unitary(rank: usize) -> Self {
        GroupSpec { family: GroupFamily::Unitary, rank }
    }

    pub fn general_linear(rank: usize) -> Self {
        GroupSpec { family: GroupFamily::GeneralLinear, rank }
    }

    pub fn special_unitary(rank: usize) -> Self {
        GroupSpec { family: GroupFamily::SpecialUnitary, rank }
    }

    pub fn is_compact(&self) -> bool {
        self.family != GroupFamily::GeneralLinear
    }

    /// Spec of a block sum; the family is kept when both agree, otherwise GL.
    /// Block sums of SU elements are SU.
    pub fn block_sum(&self, other: &GroupSpec) -> GroupSpec {
        let family = if self.family == other.family {
            self.family
        } else if self.is_compact() && other.is_compact() {
            GroupFamily::Unitary
        } else {
            GroupFamily::GeneralLinear
        };
        GroupSpec { family, rank: self.rank + other.rank }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::Validation("matrix rank must be positive".into()));
        }
        Ok(())
    }

    /// Checks a single group element against the spec.
    pub fn check_group_element(&self, g: &[C64]) -> Result<()> {
        let n = self.rank;
        match self.family {
            GroupFamily::GeneralLinear => {
                linalg::inverse(g, n)?;
            }
            GroupFamily::Unitary | GroupFamily::SpecialUnitary => {
                let defect = linalg::unitarity_defect(g, n);
                if defect > TOL_ALG {
                    return Err(Error::Validation(format!("sample is not unitary (defect {defect:e})")));
                }
                if self.family == GroupFamily::SpecialUnitary {
                    let det = linalg::determinant(g, n);
                    if (det - linalg::ONE).norm() > TOL_ALG {
                        return Err(Error::Validation(format!("determinant {det} is not 1")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks a single Lie algebra element against the spec.
    pub fn check_algebra_element(&self, x: &[C64]) -> Result<()> {
        let n = self.rank;
        if self.is_compact() {
            let defect = linalg::skew_defect(x, n);
            if defect > TOL_ALG {
                return Err(Error::Validation(format!("sample is not skew-Hermitian (defect {defect:e})")));
            }
        }
        if self.family == GroupFamily::SpecialUnitary {
            let tr = linalg::trace(x, n);
            if tr.norm() > TOL_ALG {
                return Err(Error::Validation(format!("trace {tr} is not zero")));
            }
        }
        Ok(())
    }

    /// Group inverse, using the adjoint for compact families.
    pub fn invert(&self, g: &[C64]) -> Result<Vec<C64>> {
        if self.is_compact() {
            Ok(linalg::adjoint(g, self.rank))
        } else {
            linalg::inverse(g, self.rank)
        }
    }
}

/// A loop sampled at `theta_j = 2 pi j / N`, valued either in the group
/// described by `spec` or in its Lie algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledLoop {
    spec: GroupSpec,
    algebra: bool,
    len: usize,
    samples: Vec<C64>,
}

fn check_sample_count(len: usize) -> Result<()> {
    if len < 8 || !len.is_power_of_two() {
        return Err(Error::Validation(format!("sample count {len} must be a power of two and at least 8")));
    }
    Ok(())
}

impl SampledLoop {
    /// Group-valued loop from flat samples; every sample is validated.
    pub fn group(spec: GroupSpec, samples: Vec<C64>) -> Result<Self> {
        let l = SampledLoop::unchecked(spec, false, samples)?;
        for s in l.iter() {
            spec.check_group_element(s)?;
        }
        Ok(l)
    }

    /// Algebra-valued loop from flat samples.
    pub fn algebra(spec: GroupSpec, samples: Vec<C64>) -> Result<Self> {
        let l = SampledLoop::unchecked(spec, true, samples)?;
        for s in l.iter() {
            spec.check_algebra_element(s)?;
        }
        Ok(l)
    }

    fn unchecked(spec: GroupSpec, algebra: bool, samples: Vec<C64>) -> Result<Self> {
        spec.validate()?;
        let nn = spec.rank * spec.rank;
        if samples.len() % nn != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} values do not split into {}x{} matrices",
                samples.len(),
                spec.rank,
                spec.rank
            )));
        }
        let len = samples.len() / nn;
        check_sample_count(len)?;
        Ok(SampledLoop { spec, algebra, len, samples })
    }

    pub fn group_from_fn(spec: GroupSpec, len: usize, f: impl Fn(f64) -> Vec<C64>) -> Result<Self> {
        SampledLoop::group(spec, sample_fn(len, f))
    }

    pub fn algebra_from_fn(spec: GroupSpec, len: usize, f: impl Fn(f64) -> Vec<C64>) -> Result<Self> {
        SampledLoop::algebra(spec, sample_fn(len, f))
    }

    pub fn constant_identity(spec: GroupSpec, len: usize) -> Result<Self> {
        let id = linalg::identity(spec.rank);
        SampledLoop::group_from_fn(spec, len, |_| id.clone())
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn rank(&self) -> usize {
        self.spec.rank
    }

    pub fn is_algebra(&self) -> bool {
        self.algebra
    }

    /// Number of theta samples.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn sample(&self, j: usize) -> &[C64] {
        let nn = self.spec.rank * self.spec.rank;
        &self.samples[j * nn..(j + 1) * nn]
    }

    pub fn iter(&self) -> std::slice::Chunks<'_, C64> {
        let nn = self.spec.rank * self.spec.rank;
        self.samples.chunks(nn)
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.len).map(|j| 2.0 * PI * j as f64 / self.len as f64).collect()
    }

    pub fn basedness_defect(&self) -> f64 {
        linalg::identity_defect(self.sample(0), self.spec.rank)
    }

    /// `gamma(0) = I` to `TOL_BASED`.
    pub fn is_based(&self) -> bool {
        !self.algebra && self.basedness_defect() <= TOL_BASED
    }

    fn check_pair(&self, other: &SampledLoop) -> Result<()> {
        if self.len != other.len {
            return Err(Error::SampleCountMismatch { left: self.len, right: other.len });
        }
        Ok(())
    }

    fn require_group(&self) -> Result<()> {
        if self.algebra {
            return Err(Error::Validation("operation needs a group-valued loop".into()));
        }
        Ok(())
    }

    /// Sample-wise product.
    pub fn pointwise_product(&self, other: &SampledLoop) -> Result<SampledLoop> {
        self.check_pair(other)?;
        self.require_group()?;
        other.require_group()?;
        if self.spec.rank != other.spec.rank {
            return Err(Error::DimensionMismatch(format!("rank {} vs {}", self.spec.rank, other.spec.rank)));
        }
        let n = self.spec.rank;
        let samples = self.iter().zip(other.iter()).flat_map(|(a, b)| linalg::mul(a, b, n)).collect();
        let spec = if self.spec == other.spec { self.spec } else { GroupSpec::general_linear(n) };
        Ok(SampledLoop { spec, algebra: false, len: self.len, samples })
    }

    /// Sample-wise inverse.
    pub fn pointwise_inverse(&self) -> Result<SampledLoop> {
        self.require_group()?;
        let mut samples = Vec::with_capacity(self.samples.len());
        for s in self.iter() {
            samples.extend(self.spec.invert(s)?);
        }
        Ok(SampledLoop { spec: self.spec, algebra: false, len: self.len, samples })
    }

    /// Spectral theta-derivative of every matrix entry.
    pub fn theta_derivative(&self) -> Vec<C64> {
        let nn = self.spec.rank * self.spec.rank;
        let mut out = self.samples.clone();
        let mut line = vec![ZERO; self.len];
        for e in 0..nn {
            for (j, v) in line.iter_mut().enumerate() {
                *v = out[j * nn + e];
            }
            spectral::differentiate_line(&mut line);
            for (j, v) in line.iter().enumerate() {
                out[j * nn + e] = *v;
            }
        }
        out
    }

    /// `gamma^{-1} d gamma / d theta`, an algebra-valued loop.
    pub fn log_derivative(&self) -> Result<SampledLoop> {
        self.require_group()?;
        let n = self.spec.rank;
        let nn = n * n;
        let deriv = self.theta_derivative();
        let mut samples = Vec::with_capacity(self.samples.len());
        for (j, s) in self.iter().enumerate() {
            let inv = self.spec.invert(s)?;
            samples.extend(linalg::mul(&inv, &deriv[j * nn..(j + 1) * nn], n));
        }
        Ok(SampledLoop { spec: self.spec, algebra: true, len: self.len, samples })
    }

    /// Winding number with the default integrality tolerance.
    pub fn winding_number(&self) -> Result<Winding> {
        self.winding_number_with_tol(TOL_INT)
    }

    /// `(1/2 pi i) * integral of tr(gamma^{-1} d gamma)` by the trapezoid rule.
    pub fn winding_number_with_tol(&self, tol: f64) -> Result<Winding> {
        let x = self.log_derivative()?;
        let n = self.spec.rank;
        let sum: C64 = x.iter().map(|s| linalg::trace(s, n)).sum();
        let integral = sum * (2.0 * PI / self.len as f64);
        let raw = (integral / C64::new(0.0, 2.0 * PI)).re;
        let value = raw.round();
        let distance = (raw - value).abs();
        if !(distance <= tol) {
            return Err(Error::IntegralityViolation { raw, distance, tolerance: tol });
        }
        Ok(Winding { value: value as i64, raw, distance })
    }

    /// Block sum with `self` in the top-left block.
    pub fn block_sum(&self, other: &SampledLoop) -> Result<SampledLoop> {
        self.check_pair(other)?;
        if self.algebra != other.algebra {
            return Err(Error::Validation("block sum of a group loop with an algebra loop".into()));
        }
        let (na, nb) = (self.spec.rank, other.spec.rank);
        let samples = self.iter().zip(other.iter()).flat_map(|(a, b)| linalg::block_diag(a, na, b, nb)).collect();
        Ok(SampledLoop { spec: self.spec.block_sum(&other.spec), algebra: self.algebra, len: self.len, samples })
    }

    /// Max sample-wise distance to another loop of the same shape.
    pub fn distance(&self, other: &SampledLoop) -> Result<f64> {
        self.check_pair(other)?;
        if self.samples.len() != other.samples.len() {
            return Err(Error::DimensionMismatch("loops of different rank".into()));
        }
        Ok(linalg::max_abs(&linalg::sub(&self.samples, &other.samples)))
    }

    pub fn skew_defect(&self) -> f64 {
        self.iter().fold(0.0, |m, s| m.max(linalg::skew_defect(s, self.spec.rank)))
    }
}

fn sample_fn(len: usize, f: impl Fn(f64) -> Vec<C64>) -> Vec<C64> {
    (0..len).flat_map(|j| f(2.0 * PI * j as f64 / len as f64)).collect()
}

/// Result of a winding-number quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Winding {
    pub value: i64,
    pub raw: f64,
    pub distance: f64,
}

#[derive(Serialize, Deserialize)]
struct LoopWire {
    n: usize,
    #[serde(rename = "N")]
    len: usize,
    group: GroupFamily,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    algebra: bool,
    samples: Vec<Vec<C64>>,
}

impl Serialize for SampledLoop {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LoopWire {
            n: self.spec.rank,
            len: self.len,
            group: self.spec.family,
            algebra: self.algebra,
            samples: self.iter().map(<[C64]>::to_vec).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampledLoop {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = LoopWire::deserialize(d)?;
        if w.samples.len() != w.len {
            return Err(D::Error::custom(format!("N = {} but {} samples given", w.len, w.samples.len())));
        }
        if let Some(bad) = w.samples.iter().find(|s| s.len() != w.n * w.n) {
            return Err(D::Error::custom(format!("sample has {} entries, expected {}", bad.len(), w.n * w.n)));
        }
        let spec = GroupSpec { family: w.group, rank: w.n };
        let flat = w.samples.into_iter().flatten().collect();
        let l = if w.algebra { SampledLoop::algebra(spec, flat) } else { SampledLoop::group(spec, flat) };
        l.map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phase(k: f64) -> impl Fn(f64) -> Vec<C64> {
        move |t| vec![C64::from_polar(1.0, k * t)]
    }

    fn diag_phase(a: f64, b: f64) -> impl Fn(f64) -> Vec<C64> {
        move |t| vec![C64::from_polar(1.0, a * t), ZERO, ZERO, C64::from_polar(1.0, b * t)]
    }

    #[test]
    fn product_with_inverse_is_identity() {
        let g = SampledLoop::group_from_fn(GroupSpec::unitary(2), 16, diag_phase(1.0, -2.0)).unwrap();
        let p = g.pointwise_product(&g.pointwise_inverse().unwrap()).unwrap();
        let id = SampledLoop::constant_identity(GroupSpec::unitary(2), 16).unwrap();
        assert!(p.distance(&id).unwrap() < 1e-15);
        assert!(id.pointwise_product(&g).unwrap().distance(&g).unwrap() == 0.0);
    }

    #[test]
    fn phases_multiply() {
        let a = SampledLoop::group_from_fn(GroupSpec::unitary(1), 32, phase(1.0)).unwrap();
        let b = SampledLoop::group_from_fn(GroupSpec::unitary(1), 32, phase(2.0)).unwrap();
        let c = SampledLoop::group_from_fn(GroupSpec::unitary(1), 32, phase(3.0)).unwrap();
        assert!(a.pointwise_product(&b).unwrap().distance(&c).unwrap() < 1e-14);
        let inv = SampledLoop::group_from_fn(GroupSpec::unitary(1), 32, phase(-1.0)).unwrap();
        assert!(a.pointwise_inverse().unwrap().distance(&inv).unwrap() < 1e-15);
    }

    #[test]
    fn log_derivative_of_phase_is_constant() {
        let g = SampledLoop::group_from_fn(GroupSpec::unitary(1), 16, phase(3.0)).unwrap();
        let x = g.log_derivative().unwrap();
        assert!(x.iter().all(|s| (s[0] - C64::new(0.0, 3.0)).norm() < 1e-12));
        let c = SampledLoop::constant_identity(GroupSpec::unitary(2), 16).unwrap();
        assert!(linalg::max_abs(c.log_derivative().unwrap().samples()) < 1e-15);
    }

    #[test]
    fn winding_numbers() {
        let g = SampledLoop::group_from_fn(GroupSpec::unitary(1), 8, phase(1.0)).unwrap();
        assert_eq!(g.winding_number().unwrap().value, 1);
        let d = SampledLoop::group_from_fn(GroupSpec::unitary(2), 32, diag_phase(2.0, -5.0)).unwrap();
        assert_eq!(d.winding_number().unwrap().value, -3);
        let a = SampledLoop::group_from_fn(GroupSpec::unitary(1), 16, phase(1.0)).unwrap();
        let b = SampledLoop::group_from_fn(GroupSpec::unitary(1), 16, phase(-1.0)).unwrap();
        let s = a.block_sum(&b).unwrap();
        assert_eq!(s.rank(), 2);
        assert_eq!(s.winding_number().unwrap().value, 0);
    }

    #[test]
    fn under_resolved_loop_is_flagged() {
        // A non-integer phase rate is not a loop at all; the quadrature lands off the integers.
        let spec = GroupSpec::unitary(1);
        let g = SampledLoop::group_from_fn(spec, 8, |t| vec![C64::from_polar(1.0, 0.5 * t)]).unwrap();
        assert!(matches!(g.winding_number(), Err(Error::IntegralityViolation { .. })));
    }

    #[test]
    fn rejects_bad_samples() {
        let spec = GroupSpec::unitary(1);
        assert!(SampledLoop::group_from_fn(spec, 8, |_| vec![C64::new(2.0, 0.0)]).is_err());
        assert!(SampledLoop::group_from_fn(spec, 12, |_| vec![linalg::ONE]).is_err());
        assert!(SampledLoop::algebra_from_fn(spec, 8, |_| vec![linalg::ONE]).is_err());
        let gl = GroupSpec::general_linear(2);
        assert!(SampledLoop::group_from_fn(gl, 8, |_| vec![linalg::ONE; 4]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = SampledLoop::group_from_fn(GroupSpec::unitary(2), 8, diag_phase(1.0, 0.0)).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.starts_with("{\"n\":2,\"N\":8,\"group\":\"U\""));
        let back: SampledLoop = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
