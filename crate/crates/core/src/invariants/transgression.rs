//! Transgression forms and the odd Chern character of a group-valued map.

use super::{two_pi_i_pow, SymTrace};
use crate::coefficients;
use crate::error::Result;
use crate::gauge::{GroupMap, Side};
use crate::linalg::C64;
use crate::meshforms::{GradedForm, MatrixForm};

/// `g^* tau_f = (-1/2)^{k-1} k!(k-1)!/(2k-1)! f(Theta, [Theta, Theta]^{k-1})`
/// with `Theta = g^{-1} dg`.
pub fn transgression_pullback(f: SymTrace, g: &GroupMap) -> Result<MatrixForm> {
    let k = f.degree();
    let theta = g.mc_pullback(Side::Left)?;
    let tt = theta.bracket(&theta)?;
    let mut args: Vec<&MatrixForm> = vec![&theta];
    args.extend(std::iter::repeat(&tt).take(k - 1));
    let c = coefficients::to_f64(&coefficients::transgression_prefactor(k)?);
    Ok(f.evaluate(&args)?.scale_real(c))
}

/// `sum_k g^* tau_k` over the normalized traces, up to the mesh dimension
/// and `truncate` when given.
pub fn total_transgression(g: &GroupMap, truncate: Option<usize>) -> Result<GradedForm> {
    let top = truncate.unwrap_or(usize::MAX).min(g.mesh().dim());
    let mut out = GradedForm::new();
    let mut k = 1;
    while 2 * k - 1 <= top {
        out.add_part(transgression_pullback(SymTrace::new(k)?, g)?)?;
        k += 1;
    }
    Ok(out)
}

/// `sum_j (-j!/(2j+1)!) (-1/2 pi i)^{j+1} tr((g^{-1} dg)^{2j+1})`.
pub fn odd_chern_character(g: &GroupMap, truncate: Option<usize>) -> Result<GradedForm> {
    let top = truncate.unwrap_or(usize::MAX).min(g.mesh().dim());
    let theta = g.mc_pullback(Side::Left)?;
    let theta2 = theta.wedge(&theta)?;
    let mut out = GradedForm::new();
    let mut power = theta.clone();
    let mut j = 0;
    while 2 * j + 1 <= top {
        let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let coef = C64::new(sign * coefficients::to_f64(&coefficients::odd_chern_rational(j)), 0.0) / two_pi_i_pow(j + 1);
        out.add_part(power.trace().scale(coef))?;
        power = power.wedge(&theta2)?;
        j += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loopcore::GroupSpec;
    use crate::meshforms::Mesh;
    use crate::samples::{projector_phase, random_projector, rng, UnitaryTrigMap};
    use std::sync::Arc;

    #[test]
    fn circle_transgression_integrates_to_winding() {
        let mesh = Arc::new(Mesh::circle(32).unwrap());
        let f = SymTrace::new(1).unwrap();
        for k in [-3i32, -1, 0, 2, 5] {
            let g = GroupMap::from_fn(&mesh, GroupSpec::unitary(1), |x| vec![C64::from_polar(1.0, k as f64 * x[0])]).unwrap();
            let v = transgression_pullback(f, &g).unwrap().integrate_top_scalar().unwrap();
            assert!((v - C64::new(k as f64, 0.0)).norm() < 1e-12, "k={k}: {v}");
        }
    }

    #[test]
    fn projector_loop_winding() {
        let mesh = Arc::new(Mesh::circle(32).unwrap());
        let p = random_projector(&mut rng(2), 3);
        let g = GroupMap::from_fn(&mesh, GroupSpec::unitary(3), |x| projector_phase(&p, 3, 4.0 * x[0])).unwrap();
        let ch = odd_chern_character(&g, None).unwrap();
        let v = ch.part(1).unwrap().integrate_top_scalar().unwrap();
        assert!((v.re - 4.0).abs() < 1e-12 && v.im.abs() < 1e-12);
    }

    #[test]
    fn character_equals_transgression_sum() {
        let mesh = Arc::new(Mesh::torus(&[16, 16, 16]).unwrap());
        let g = UnitaryTrigMap::random(&mut rng(4), 2, &[1, 1, 1], 3).sample(&mesh).unwrap();
        let ch = odd_chern_character(&g, None).unwrap();
        let tau = total_transgression(&g, None).unwrap();
        assert_eq!(ch.degrees(), vec![1, 3]);
        assert!(ch.distance(&tau).unwrap() < 1e-12);
        assert!(ch.d().unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn truncation_drops_high_degrees() {
        let mesh = Arc::new(Mesh::torus(&[8, 8, 8]).unwrap());
        let g = UnitaryTrigMap::random(&mut rng(5), 2, &[1, 1, 1], 2).sample(&mesh).unwrap();
        assert_eq!(odd_chern_character(&g, Some(1)).unwrap().degrees(), vec![1]);
    }
}
