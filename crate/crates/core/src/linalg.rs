//! Small dense complex matrix kernels.
//!
//! Matrices are stored row-major in flat `[Complex64]` slices of length `n*n`.
//! Grids of matrices (one per sample point) are concatenated, so the matrix
//! at point `p` occupies `p*n*n .. (p+1)*n*n`. The hot kernels (products,
//! commutators, adjoints) are hand-written; factorizations go through nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Condition number above which a general-linear sample is treated as singular.
pub const GL_CONDITION_LIMIT: f64 = 1e12;

pub fn identity(n: usize) -> Vec<C64> {
    let mut m = vec![ZERO; n * n];
    for i in 0..n {
        m[i * n + i] = ONE;
    }
    m
}

/// `out += a * b`
#[inline]
pub fn mul_acc(a: &[C64], b: &[C64], out: &mut [C64], n: usize) {
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == ZERO {
                continue;
            }
            let brow = &b[k * n..k * n + n];
            let orow = &mut out[i * n..i * n + n];
            for j in 0..n {
                orow[j] += aik * brow[j];
            }
        }
    }
}

/// `out += s * a * b`
#[inline]
pub fn mul_acc_scaled(a: &[C64], b: &[C64], s: C64, out: &mut [C64], n: usize) {
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k] * s;
            if aik == ZERO {
                continue;
            }
            let brow = &b[k * n..k * n + n];
            let orow = &mut out[i * n..i * n + n];
            for j in 0..n {
                orow[j] += aik * brow[j];
            }
        }
    }
}

pub fn mul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n * n];
    mul_acc(a, b, &mut out, n);
    out
}

pub fn mul3(a: &[C64], b: &[C64], c: &[C64], n: usize) -> Vec<C64> {
    mul(&mul(a, b, n), c, n)
}

pub fn adjoint(a: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}

pub fn trace(a: &[C64], n: usize) -> C64 {
    (0..n).map(|i| a[i * n + i]).sum()
}

/// `ad(g) x = g x g^{-1}` given `g` and `g^{-1}`.
pub fn conjugate(g: &[C64], x: &[C64], g_inv: &[C64], n: usize) -> Vec<C64> {
    mul3(g, x, g_inv, n)
}

pub fn commutator(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = mul(a, b, n);
    let ba = mul(b, a, n);
    for (o, v) in out.iter_mut().zip(ba) {
        *o -= v;
    }
    out
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

pub fn max_abs(a: &[C64]) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Max-entry distance from the identity.
pub fn identity_defect(a: &[C64], n: usize) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let e = if i == j { a[i * n + j] - ONE } else { a[i * n + j] };
            m = m.max(e.norm());
        }
    }
    m
}

/// `max |a^* a - I|`
pub fn unitarity_defect(a: &[C64], n: usize) -> f64 {
    identity_defect(&mul(&adjoint(a, n), a, n), n)
}

/// `max |a + a^*|`, zero exactly for skew-Hermitian `a`.
pub fn skew_defect(a: &[C64], n: usize) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            m = m.max((a[i * n + j] + a[j * n + i].conj()).norm());
        }
    }
    m
}

/// Projects onto skew-Hermitian matrices, `X -> (X - X^*)/2`.
pub fn skew_project(a: &mut [C64], n: usize) {
    let adj = adjoint(a, n);
    for (x, y) in a.iter_mut().zip(adj) {
        *x = (*x - y) * 0.5;
    }
}

pub fn to_dmatrix(a: &[C64], n: usize) -> DMatrix<C64> {
    DMatrix::from_row_slice(n, n, a)
}

pub fn from_dmatrix(m: &DMatrix<C64>) -> Vec<C64> {
    let n = m.nrows();
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = m[(i, j)];
        }
    }
    out
}

pub fn determinant(a: &[C64], n: usize) -> C64 {
    match n {
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        _ => to_dmatrix(a, n).lu().determinant(),
    }
}

/// Ratio of extreme singular values.
pub fn condition_number(a: &[C64], n: usize) -> f64 {
    let sv = to_dmatrix(a, n).svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// LU-based inverse with a condition-number guard.
pub fn inverse(a: &[C64], n: usize) -> Result<Vec<C64>> {
    if n == 1 {
        if a[0] == ZERO {
            return Err(Error::Singular { condition: f64::INFINITY });
        }
        return Ok(vec![ONE / a[0]]);
    }
    let cond = condition_number(a, n);
    if !(cond <= GL_CONDITION_LIMIT) {
        return Err(Error::Singular { condition: cond });
    }
    let inv = to_dmatrix(a, n)
        .lu()
        .try_inverse()
        .ok_or(Error::Singular { condition: cond })?;
    Ok(from_dmatrix(&inv))
}

pub fn expm(a: &[C64], n: usize) -> Vec<C64> {
    if n == 1 {
        return vec![a[0].exp()];
    }
    from_dmatrix(&to_dmatrix(a, n).exp())
}

/// Unitary factor of the polar decomposition, `U V^*` from the SVD.
pub fn polar_unitary(a: &[C64], n: usize) -> Vec<C64> {
    if n == 1 {
        let r = a[0].norm();
        return vec![if r == 0.0 { ONE } else { a[0] / r }];
    }
    let svd = to_dmatrix(a, n).svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    from_dmatrix(&(u * v_t))
}

/// Block-diagonal sum of an `na`-matrix and an `nb`-matrix.
pub fn block_diag(a: &[C64], na: usize, b: &[C64], nb: usize) -> Vec<C64> {
    let n = na + nb;
    let mut out = vec![ZERO; n * n];
    for i in 0..na {
        for j in 0..na {
            out[i * n + j] = a[i * na + j];
        }
    }
    for i in 0..nb {
        for j in 0..nb {
            out[(na + i) * n + na + j] = b[i * nb + j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_rotation_is_adjoint() {
        let t: f64 = 0.3;
        let a = vec![C64::new(t.cos(), 0.0), C64::new(-t.sin(), 0.0), C64::new(t.sin(), 0.0), C64::new(t.cos(), 0.0)];
        let inv = inverse(&a, 2).unwrap();
        assert!(max_abs(&sub(&inv, &adjoint(&a, 2))) < 1e-15);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = vec![ONE, ONE, ONE, ONE];
        assert!(matches!(inverse(&a, 2), Err(Error::Singular { .. })));
    }

    #[test]
    fn exp_of_skew_is_unitary() {
        let x = vec![C64::new(0.0, 0.4), C64::new(0.3, 0.2), C64::new(-0.3, 0.2), C64::new(0.0, -1.1)];
        assert!(skew_defect(&x, 2) < 1e-16);
        let u = expm(&x, 2);
        assert!(unitarity_defect(&u, 2) < 1e-14);
        let p = polar_unitary(&scale(&u, C64::new(2.0, 0.0)), 2);
        assert!(max_abs(&sub(&p, &u)) < 1e-14);
    }

    #[test]
    fn block_diag_places_blocks() {
        let m = block_diag(&[C64::new(2.0, 0.0)], 1, &identity(2), 2);
        assert_eq!(m[0], C64::new(2.0, 0.0));
        assert_eq!(m[4], ONE);
        assert_eq!(m[8], ONE);
        assert_eq!(m[1], ZERO);
    }
}
