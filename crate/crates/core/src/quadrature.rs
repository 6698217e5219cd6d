//! Gauss–Legendre rules and the effective quadrature weights used on mesh factors.

use std::f64::consts::PI;

/// Default Gauss–Legendre order for interval factors.
pub const INTERVAL_GL_NODES: usize = 32;
/// Width of the local Lagrange stencil used to resample uniform interval
/// samples onto Gauss–Legendre nodes.
const STENCIL: usize = 8;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..(m + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(m);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (x.iter().map(|t| mid + half * t).collect(), w.iter().map(|v| v * half).collect())
}

/// Uniform nodes `i/(n-1)` of an interval factor.
pub fn interval_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Lagrange weights for evaluating at `x` from the uniform interval samples,
/// using the `STENCIL` nearest nodes.
pub fn interval_interpolation_row(n: usize, x: f64) -> Vec<(usize, f64)> {
    let h = 1.0 / (n - 1) as f64;
    let width = STENCIL.min(n);
    let centre = (x / h).floor() as isize - (width as isize / 2 - 1);
    let start = centre.clamp(0, (n - width) as isize) as usize;
    let idx: Vec<usize> = (start..start + width).collect();
    let xs: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
    idx.iter()
        .enumerate()
        .map(|(a, &i)| {
            let mut l = 1.0;
            for (b, xb) in xs.iter().enumerate() {
                if a != b {
                    l *= (x - xb) / (xs[a] - xb);
                }
            }
            (i, l)
        })
        .collect()
}

/// Quadrature weights over the uniform samples of an interval factor on
/// `[0, 1]`: Gauss–Legendre on `gl` nodes, each node value obtained by local
/// Lagrange interpolation.
pub fn interval_weights(n: usize, gl: usize) -> Vec<f64> {
    let (x, w) = gauss_legendre_on(gl, 0.0, 1.0);
    let mut out = vec![0.0; n];
    for (xg, wg) in x.iter().zip(&w) {
        for (i, l) in interval_interpolation_row(n, *xg) {
            out[i] += wg * l;
        }
    }
    out
}

/// Trapezoid weights on a periodic grid of `n` points over `[0, 2 pi)`.
pub fn circle_weights(n: usize) -> Vec<f64> {
    vec![2.0 * PI / n as f64; n]
}
