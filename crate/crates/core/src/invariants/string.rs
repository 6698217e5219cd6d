//! String forms on the base and their potentials.

use std::f64::consts::PI;

use super::paths::PairPath;
use super::{factorial, t_rule, two_pi_i_pow, SymTrace};
use crate::coefficients;
use crate::error::Result;
use crate::gauge::GaugePair;
use crate::linalg::C64;
use crate::meshforms::{GradedForm, MatrixForm};

fn accumulate(total: &mut Option<MatrixForm>, term: MatrixForm) -> Result<()> {
    *total = Some(match total.take() {
        None => term,
        Some(t) => t.add(&term)?,
    });
    Ok(())
}

/// `s_f = k * integral_{S^1} f(nabla Phi, F^{k-1})`, a closed `(2k-1)`-form on the base.
pub fn string_form(f: SymTrace, p: &GaugePair) -> Result<MatrixForm> {
    let k = f.degree();
    let curv = p.connection().curvature()?;
    let nabla = p.higgs_cov_derivative()?;
    let mut args: Vec<&MatrixForm> = vec![&nabla];
    args.extend(std::iter::repeat(&curv).take(k - 1));
    Ok(f.evaluate(&args)?.integrate_along(p.loop_axis())?.scale_real(k as f64))
}

/// Sum over `j >= 1` of `integral_{S^1} tr(F^{j-1} ^ nabla Phi) / ((j-1)! (2 pi i)^j)`,
/// truncated at the base dimension and at `truncate` when given.
pub fn total_string_form(p: &GaugePair, truncate: Option<usize>) -> Result<GradedForm> {
    let axis = p.loop_axis();
    let top = truncate.unwrap_or(usize::MAX).min(axis);
    let curv = p.connection().curvature()?;
    let nabla = p.higgs_cov_derivative()?;
    let mut out = GradedForm::new();
    let mut chain = nabla.clone();
    let mut j = 1;
    while 2 * j - 1 <= top {
        let coef = C64::new(1.0 / factorial(j - 1), 0.0) / two_pi_i_pow(j);
        out.add_part(chain.trace().integrate_along(axis)?.scale(coef))?;
        chain = curv.wedge(&chain)?;
        j += 1;
    }
    Ok(out)
}

/// Relative string potential along a path of gauge pairs,
/// `k integral_0^1 integral_{S^1} ((k-1) f(B, F^{k-2}, nabla Phi) + f(F^{k-1}, phi)) dt`.
pub fn string_potential_relative(f: SymTrace, path: &dyn PairPath, nodes: usize) -> Result<MatrixForm> {
    let k = f.degree();
    let mut total = None;
    for (t, w) in t_rule(&path.breakpoints(), nodes) {
        let p = path.at(t)?;
        let (b, phi) = path.velocity(t)?;
        let curv = p.connection().curvature()?;
        let mut integrand = {
            let mut args: Vec<&MatrixForm> = std::iter::repeat(&curv).take(k - 1).collect();
            args.push(&phi);
            f.evaluate(&args)?
        };
        if k >= 2 {
            let nabla = p.higgs_cov_derivative()?;
            let mut args: Vec<&MatrixForm> = vec![&b];
            args.extend(std::iter::repeat(&curv).take(k - 2));
            args.push(&nabla);
            integrand = integrand.axpy(C64::new((k - 1) as f64, 0.0), &f.evaluate(&args)?)?;
        }
        let term = integrand.integrate_along(p.loop_axis())?.scale_real(w * k as f64);
        accumulate(&mut total, term)?;
    }
    Ok(total.expect("at least one node"))
}

/// Closed-form total string potential of a pair, relative to the zero pair.
pub fn string_potential_total(f: SymTrace, p: &GaugePair) -> Result<MatrixForm> {
    let k = f.degree();
    let a = p.connection().form();
    let phi = p.higgs().field();
    let curv = p.connection().curvature()?;
    let aa = a.bracket(a)?;
    let a_phi = a.bracket(phi)?;
    let nabla = p.higgs_cov_derivative()?;
    let c: Vec<f64> = coefficients::series_coefficients(k)?.iter().map(coefficients::to_f64).collect();
    fn tail<'a>(lead: Vec<&'a MatrixForm>, aa: &'a MatrixForm, n_aa: usize, curv: &'a MatrixForm, n_curv: usize) -> Vec<&'a MatrixForm> {
        let mut args = lead;
        args.extend(std::iter::repeat(aa).take(n_aa));
        args.extend(std::iter::repeat(curv).take(n_curv));
        args
    }
    let mut total = None;
    for (i, ci) in c.iter().enumerate() {
        accumulate(&mut total, f.evaluate(&tail(vec![phi], &aa, i, &curv, k - 1 - i))?.scale_real(*ci))?;
        if i >= 1 {
            let first = f.evaluate(&tail(vec![a, &a_phi], &aa, i - 1, &curv, k - 1 - i))?.scale_real(2.0 * i as f64 * ci);
            let second = f.evaluate(&tail(vec![a, &nabla], &aa, i - 1, &curv, k - 1 - i))?.scale_real(-2.0 * (k + i) as f64 * ci);
            accumulate(&mut total, first.add(&second)?)?;
        }
    }
    total.expect("k >= 1").integrate_along(p.loop_axis())
}

/// The 2-form `-(1/4 pi^2) integral_{S^1} (tr(Phi F) - 1/2 tr(A ^ d_theta A))`
/// whose difference with the degree-2 total potential is exact.
pub fn gerbe_curving(p: &GaugePair) -> Result<MatrixForm> {
    let a = p.connection().form();
    let phi = p.higgs().field();
    let curv = p.connection().curvature()?;
    let da = a.partial(p.loop_axis())?;
    let integrand = phi.wedge(&curv)?.trace().sub(&a.wedge(&da)?.trace().scale_real(0.5))?;
    Ok(integrand.integrate_along(p.loop_axis())?.scale_real(-1.0 / (4.0 * PI * PI)))
}
