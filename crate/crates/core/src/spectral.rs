//! FFT kernels on uniform periodic grids.
//!
//! Grids are `theta_j = 2 pi j / N`. Wavenumbers follow the usual FFT ordering
//! `0, 1, .., N/2 - 1, -N/2, .., -1`; the Nyquist mode is dropped when
//! differentiating so that real data stays real.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Signed wavenumber of FFT bin `j` for an `n`-point transform.
#[inline]
pub fn wavenumber(j: usize, n: usize) -> f64 {
    if j < n / 2 {
        j as f64
    } else if j == n / 2 && n % 2 == 0 {
        // Nyquist
        -(j as f64)
    } else {
        j as f64 - n as f64
    }
}

/// Differentiates `line` in place with respect to `theta`, period `2 pi`.
pub fn differentiate_line(line: &mut [Complex64]) {
    let n = line.len();
    differentiate_batch(line, n);
}

/// Differentiates every consecutive run of `n` values in `buf`, each a
/// periodic line sampled on `n` points.
pub fn differentiate_batch(buf: &mut [Complex64], n: usize) {
    let fwd = forward_plan(n);
    let inv = inverse_plan(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
    fwd.process_with_scratch(buf, &mut scratch);
    let scale = 1.0 / n as f64;
    let factors: Vec<Complex64> = (0..n)
        .map(|j| if n % 2 == 0 && j == n / 2 { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, wavenumber(j, n) * scale) })
        .collect();
    for line in buf.chunks_mut(n) {
        for (c, f) in line.iter_mut().zip(&factors) {
            *c *= f;
        }
    }
    inv.process_with_scratch(buf, &mut scratch);
}

/// Fourier coefficients `c_k` with `f(theta) = sum_k c_k e^{i k theta}`,
/// returned in FFT order.
pub fn coefficients(line: &[Complex64]) -> Vec<Complex64> {
    let n = line.len();
    let mut buf = line.to_vec();
    forward_plan(n).process(&mut buf);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

/// Trigonometric interpolant of `line` resampled on `m >= N` uniform points
/// (zero padding). The Nyquist coefficient is split symmetrically.
pub fn resample(line: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = line.len();
    assert!(m >= n, "resample only refines");
    let c = coefficients(line);
    let mut padded = vec![Complex64::new(0.0, 0.0); m];
    for (j, cj) in c.iter().enumerate() {
        if n % 2 == 0 && j == n / 2 {
            if m == n {
                padded[j] += *cj;
            } else {
                padded[n / 2] += *cj * 0.5;
                padded[m - n / 2] += *cj * 0.5;
            }
            continue;
        }
        let k = wavenumber(j, n) as i64;
        let idx = if k >= 0 { k as usize } else { (m as i64 + k) as usize };
        padded[idx] += *cj;
    }
    inverse_plan(m).process(&mut padded);
    padded
}

/// Evaluates the trigonometric interpolant at an arbitrary `theta`.
pub fn evaluate(coeffs: &[Complex64], theta: f64) -> Complex64 {
    let n = coeffs.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, c) in coeffs.iter().enumerate() {
        if n % 2 == 0 && j == n / 2 {
            acc += *c * (n as f64 / 2.0 * theta).cos();
        } else {
            acc += *c * Complex64::from_polar(1.0, wavenumber(j, n) * theta);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let th = grid(32);
        let mut line: Vec<Complex64> = th.iter().map(|t| Complex64::new(t.sin(), 0.0)).collect();
        differentiate_line(&mut line);
        for (v, t) in line.iter().zip(&th) {
            assert!((v - Complex64::new(t.cos(), 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_complex_exponential() {
        let th = grid(16);
        let mut line: Vec<Complex64> = th.iter().map(|t| Complex64::from_polar(1.0, -3.0 * t)).collect();
        differentiate_line(&mut line);
        for (v, t) in line.iter().zip(&th) {
            let expect = Complex64::new(0.0, -3.0) * Complex64::from_polar(1.0, -3.0 * t);
            assert!((v - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn resample_reproduces_bandlimited_function() {
        let f = |t: f64| Complex64::new((2.0 * t).cos() + 0.3 * t.sin(), (3.0 * t).sin());
        let coarse: Vec<_> = grid(16).into_iter().map(f).collect();
        let fine = resample(&coarse, 64);
        for (v, t) in fine.iter().zip(grid(64)) {
            assert!((v - f(t)).norm() < 1e-13);
        }
        let c = coefficients(&coarse);
        assert!((evaluate(&c, 0.123) - f(0.123)).norm() < 1e-13);
    }
}
