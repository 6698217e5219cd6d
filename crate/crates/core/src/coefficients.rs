//! Exact rational coefficients of the characteristic-form series.
//!
//! Every coefficient is computed with big rationals and, separately, in
//! floating point; [`check_float_agreement`] compares the two.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest degree supported by the coefficient tables.
pub const MAX_DEGREE: usize = 12;

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n as u64).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn fact(n: usize) -> BigRational {
    BigRational::from_integer(factorial(n))
}

fn binomial(n: usize, k: usize) -> BigRational {
    fact(n) / (fact(k) * fact(n - k))
}

fn minus_half_pow(i: usize) -> BigRational {
    let mut r = BigRational::one();
    for _ in 0..i {
        r *= BigRational::new(BigInt::from(-1), BigInt::from(2));
    }
    r
}

fn check_degree(k: usize) -> Result<()> {
    if k == 0 || k > MAX_DEGREE {
        return Err(Error::Validation(format!("degree {k} outside 1..={MAX_DEGREE}")));
    }
    Ok(())
}

/// `sum_{i=0}^{k-1} C(k-1, i) (-1)^i / (k + i)`.
pub fn beta_alternating_sum(k: usize) -> Result<BigRational> {
    check_degree(k)?;
    let mut s = BigRational::zero();
    for i in 0..k {
        let sign = if i % 2 == 0 { int(1) } else { int(-1) };
        s += binomial(k - 1, i) * sign / int((k + i) as i64);
    }
    Ok(s)
}

/// `B(k, k) = ((k-1)!)^2 / (2k-1)!`.
pub fn beta_kk(k: usize) -> Result<BigRational> {
    check_degree(k)?;
    Ok(fact(k - 1) * fact(k - 1) / fact(2 * k - 1))
}

/// `c_i = (-1/2)^i k!(k-1)! / ((k+i)!(k-1-i)!)`, shared by the total string
/// potential and the Chern–Simons series.
pub fn series_coefficient(k: usize, i: usize) -> Result<BigRational> {
    check_degree(k)?;
    if i >= k {
        return Err(Error::Validation(format!("index {i} outside 0..{k}")));
    }
    Ok(minus_half_pow(i) * fact(k) * fact(k - 1) / (fact(k + i) * fact(k - 1 - i)))
}

pub fn series_coefficients(k: usize) -> Result<Vec<BigRational>> {
    (0..k).map(|i| series_coefficient(k, i)).collect()
}

/// Prefactor `(-1/2)^{k-1} k!(k-1)!/(2k-1)!` of the transgression form.
pub fn transgression_prefactor(k: usize) -> Result<BigRational> {
    check_degree(k)?;
    Ok(minus_half_pow(k - 1) * fact(k) * fact(k - 1) / fact(2 * k - 1))
}

/// `(-1/2)^{k-1} k!(k-1)!/(2k-2)!`, the coefficient of the loop-space
/// generator obtained from the total potential of the path fibration.
pub fn loop_generator_coefficient(k: usize) -> Result<BigRational> {
    check_degree(k)?;
    Ok(minus_half_pow(k - 1) * fact(k) * fact(k - 1) / fact(2 * k - 2))
}

/// Rational part `-j!/(2j+1)!` of the odd Chern character term of degree `2j+1`;
/// the full coefficient carries `(-1/2 pi i)^{j+1}`.
pub fn odd_chern_rational(j: usize) -> BigRational {
    -fact(j) / fact(2 * j + 1)
}

/// Rational part `-j!/(2j)!` of the homotopy integral term of degree `2j`.
pub fn homotopy_rational(j: usize) -> BigRational {
    -fact(j) / fact(2 * j)
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact fraction string, `p/q` or `p` when integral.
pub fn fraction_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Same as [`fraction_string`] with a typographic minus sign.
pub fn pretty_fraction(r: &BigRational) -> String {
    let s = fraction_string(&r.abs());
    if r.is_negative() {
        format!("\u{2212}{s}")
    } else {
        s
    }
}

/// Floating-point evaluations of the same coefficients, by direct products.
pub mod float {
    fn fact(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    pub fn series_coefficient(k: usize, i: usize) -> f64 {
        (-0.5f64).powi(i as i32) * fact(k) * fact(k - 1) / (fact(k + i) * fact(k - 1 - i))
    }

    pub fn transgression_prefactor(k: usize) -> f64 {
        (-0.5f64).powi(k as i32 - 1) * fact(k) * fact(k - 1) / fact(2 * k - 1)
    }

    pub fn beta_kk(k: usize) -> f64 {
        fact(k - 1) * fact(k - 1) / fact(2 * k - 1)
    }

    pub fn odd_chern_rational(j: usize) -> f64 {
        -fact(j) / fact(2 * j + 1)
    }

    pub fn homotopy_rational(j: usize) -> f64 {
        -fact(j) / fact(2 * j)
    }
}

/// Largest relative disagreement between the exact and floating tables for degrees `1..=k_max`.
pub fn check_float_agreement(k_max: usize) -> Result<f64> {
    let rel = |exact: &BigRational, x: f64| {
        let e = to_f64(exact);
        if e == 0.0 {
            x.abs()
        } else {
            ((e - x) / e).abs()
        }
    };
    let mut worst: f64 = 0.0;
    for k in 1..=k_max {
        for i in 0..k {
            worst = worst.max(rel(&series_coefficient(k, i)?, float::series_coefficient(k, i)));
        }
        worst = worst.max(rel(&transgression_prefactor(k)?, float::transgression_prefactor(k)));
        worst = worst.max(rel(&beta_kk(k)?, float::beta_kk(k)));
        worst = worst.max(rel(&odd_chern_rational(k), float::odd_chern_rational(k)));
        worst = worst.max(rel(&homotopy_rational(k), float::homotopy_rational(k)));
    }
    Ok(worst)
}

/// CSV table of the coefficients for degrees `1..=k_max`, as exact fractions.
pub fn csv_table(k_max: usize) -> Result<String> {
    let mut out = String::from("table,k,index,value\n");
    for k in 1..=k_max {
        for (i, c) in series_coefficients(k)?.iter().enumerate() {
            out.push_str(&format!("potential,{k},{i},{}\n", fraction_string(c)));
        }
        for (i, c) in series_coefficients(k)?.iter().enumerate() {
            out.push_str(&format!("chern_simons,{k},{i},{}\n", fraction_string(c)));
        }
        out.push_str(&format!("transgression,{k},,{}\n", fraction_string(&transgression_prefactor(k)?)));
        out.push_str(&format!("beta,{k},,{}\n", fraction_string(&beta_kk(k)?)));
    }
    Ok(out)
}
