//! Characteristic-form pipelines built from normalized symmetrized traces.

mod character;
mod paths;
mod string;
mod transgression;

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::coefficients;
use crate::error::{Error, Result};
use crate::gauge::curvature_of;
use crate::linalg::{self, C64, ZERO};
use crate::meshforms::{GradedForm, MatrixForm};
use crate::quadrature;

pub use character::{beta_quadrature, circle_distance, degree1_character, reduce_mod_one, CutoffFunction};
pub use paths::{AffineFormPath, CaloronPath, FamilyPath, FormPath, Interpolation, PairPath, SmoothPath};
pub use string::{gerbe_curving, string_form, string_potential_relative, string_potential_total, total_string_form};
pub use transgression::{odd_chern_character, total_transgression, transgression_pullback};

/// Default number of Gauss–Legendre nodes per path segment.
pub const T_QUAD_NODES: usize = 16;

/// `(2 pi i)^k`
pub fn two_pi_i_pow(k: usize) -> C64 {
    C64::new(0.0, 2.0 * PI).powu(k as u32)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// The normalized symmetrized trace of degree `k`,
/// `f(x_1, .., x_k) = 1/((k!)^2 (2 pi i)^k) sum_sigma tr(x_sigma(1) .. x_sigma(k))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymTrace {
    k: usize,
}

impl SymTrace {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 || k > coefficients::MAX_DEGREE {
            return Err(Error::Validation(format!("symmetrized trace degree {k} outside 1..={}", coefficients::MAX_DEGREE)));
        }
        Ok(SymTrace { k })
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn normalization(&self) -> C64 {
        C64::new(1.0 / (factorial(self.k) * factorial(self.k)), 0.0) / two_pi_i_pow(self.k)
    }

    /// Evaluation on constant matrices.
    pub fn evaluate_matrices(&self, args: &[&[C64]], n: usize) -> Result<C64> {
        if args.len() != self.k {
            return Err(Error::ArityMismatch { expected: self.k, found: args.len() });
        }
        let mut total = ZERO;
        for perm in permutations(self.k) {
            let prod = perm.iter().skip(1).fold(args[perm[0]].to_vec(), |acc, &i| linalg::mul(&acc, args[i], n));
            total += linalg::trace(&prod, n);
        }
        Ok(total * self.normalization())
    }

    /// Evaluation on matrix-valued forms, with Koszul signs for reordering.
    /// Arguments passed as the same reference are grouped, so repeated
    /// arguments cost one wedge chain per distinct ordering.
    pub fn evaluate(&self, args: &[&MatrixForm]) -> Result<MatrixForm> {
        if args.len() != self.k {
            return Err(Error::ArityMismatch { expected: self.k, found: args.len() });
        }
        let class: Vec<usize> = args
            .iter()
            .map(|a| args.iter().position(|b| std::ptr::eq(*a, *b)).expect("present"))
            .collect();
        let degrees: Vec<usize> = args.iter().map(|a| a.degree()).collect();
        let mut weights: HashMap<Vec<usize>, f64> = HashMap::new();
        for perm in permutations(self.k) {
            let mut sign = 1.0;
            for i in 0..self.k {
                for j in i + 1..self.k {
                    if perm[i] > perm[j] && degrees[perm[i]] % 2 == 1 && degrees[perm[j]] % 2 == 1 {
                        sign = -sign;
                    }
                }
            }
            let key: Vec<usize> = perm.iter().map(|&p| class[p]).collect();
            *weights.entry(key).or_insert(0.0) += sign;
        }
        let mut keys: Vec<_> = weights.into_iter().filter(|(_, w)| *w != 0.0).collect();
        keys.sort_by(|a, b| a.0.cmp(&b.0));
        let mut total: Option<MatrixForm> = None;
        for (seq, w) in keys {
            let chain = seq.iter().skip(1).try_fold(args[seq[0]].clone(), |acc, &i| acc.wedge(args[i]))?;
            let term = chain.trace().scale_real(w);
            total = Some(match total {
                None => term,
                Some(t) => t.add(&term)?,
            });
        }
        let norm = self.normalization();
        match total {
            Some(t) => Ok(t.scale(norm)),
            None => {
                let chain = args.iter().skip(1).try_fold(args[0].clone(), |acc, a| acc.wedge(a))?;
                Ok(chain.trace().scale(ZERO))
            }
        }
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// `f(F, .., F)` for the curvature `F` of the 1-form `a`.
pub fn chern_weil(f: SymTrace, a: &MatrixForm) -> Result<MatrixForm> {
    let curv = curvature_of(a)?;
    let args = vec![&curv; f.degree()];
    f.evaluate(&args)
}

/// Even Chern character `tr exp(F / 2 pi i)`, truncated at the mesh dimension
/// and at `truncate` when given.
pub fn chern_character_even(a: &MatrixForm, truncate: Option<usize>) -> Result<GradedForm> {
    let mesh = a.mesh();
    let top = truncate.unwrap_or(usize::MAX).min(mesh.dim());
    let n = a.rank();
    let mut out = GradedForm::new();
    out.add_part(MatrixForm::constant(mesh, 1, &[C64::new(n as f64, 0.0)]))?;
    let curv = curvature_of(a)?;
    let mut power = curv.clone();
    let mut k = 1;
    while 2 * k <= top {
        let coef = C64::new(1.0 / factorial(k), 0.0) / two_pi_i_pow(k);
        out.add_part(power.trace().scale(coef))?;
        power = power.wedge(&curv)?;
        k += 1;
    }
    Ok(out)
}

/// `sum_{j=0}^{k-1} c_j f(A, [A,A]^j, F^{k-1-j})`.
pub fn chern_simons_total(f: SymTrace, a: &MatrixForm) -> Result<MatrixForm> {
    let k = f.degree();
    let curv = curvature_of(a)?;
    let aa = a.bracket(a)?;
    let mut total: Option<MatrixForm> = None;
    for j in 0..k {
        let c = coefficients::to_f64(&coefficients::series_coefficient(k, j)?);
        let mut args: Vec<&MatrixForm> = vec![a];
        args.extend(std::iter::repeat(&aa).take(j));
        args.extend(std::iter::repeat(&curv).take(k - 1 - j));
        let term = f.evaluate(&args)?.scale_real(c);
        total = Some(match total {
            None => term,
            Some(t) => t.add(&term)?,
        });
    }
    Ok(total.expect("k >= 1"))
}

/// Gauss–Legendre rule over `[0, 1]` split at the path's breakpoints.
pub(crate) fn t_rule(breakpoints: &[f64], nodes: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for w in breakpoints.windows(2) {
        let (x, wt) = quadrature::gauss_legendre_on(nodes, w[0], w[1]);
        out.extend(x.into_iter().zip(wt));
    }
    out
}

/// `k * integral_0^1 f(B_t, F_t^{k-1}) dt` for a path of 1-forms.
pub fn chern_simons_relative(f: SymTrace, path: &dyn FormPath, nodes: usize) -> Result<MatrixForm> {
    let k = f.degree();
    let mut total: Option<MatrixForm> = None;
    for (t, w) in t_rule(&path.breakpoints(), nodes) {
        let a = path.at(t)?;
        let b = path.velocity(t)?;
        let curv = curvature_of(&a)?;
        let mut args: Vec<&MatrixForm> = vec![&b];
        args.extend(std::iter::repeat(&curv).take(k - 1));
        let term = f.evaluate(&args)?.scale_real(w * k as f64);
        total = Some(match total {
            None => term,
            Some(acc) => acc.add(&term)?,
        });
    }
    Ok(total.expect("at least one node"))
}
