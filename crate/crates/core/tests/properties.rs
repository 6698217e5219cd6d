use std::sync::Arc;

use caloron_core::coefficients;
use caloron_core::gauge::{loop_mesh, GaugePair};
use caloron_core::holonomy::{higgs_holonomy, HolonomyOptions};
use caloron_core::invariants::{reduce_mod_one, string_form, string_potential_total, SymTrace};
use caloron_core::ktheory::TwzElement;
use caloron_core::linalg::{self, C64};
use caloron_core::meshforms::{GradedForm, MatrixForm, Mesh};
use caloron_core::samples::{
    random_based_gauge, random_based_loop, random_form, random_pair, random_skew, rng, PairShape, UnitaryTrigMap,
};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

// fixed seed so runs are reproducible
fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, rng_seed: RngSeed::Fixed(0x5eed), ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn symmetrized_trace_is_symmetric_and_ad_invariant(seed in any::<u64>(), k in 1usize..=4, n in 1usize..=3) {
        let mut r = rng(seed);
        let f = SymTrace::new(k).unwrap();
        let xs: Vec<Vec<C64>> = (0..k).map(|_| random_skew(&mut r, n, 1.0)).collect();
        let args: Vec<&[C64]> = xs.iter().map(|x| x.as_slice()).collect();
        let base = f.evaluate_matrices(&args, n).unwrap();
        let mut rotated = args.clone();
        rotated.rotate_left(1);
        prop_assert!((f.evaluate_matrices(&rotated, n).unwrap() - base).norm() < 1e-12);
        let mut swapped = args.clone();
        swapped.swap(0, k - 1);
        prop_assert!((f.evaluate_matrices(&swapped, n).unwrap() - base).norm() < 1e-12);
        let g = linalg::expm(&random_skew(&mut r, n, 1.0), n);
        let gi = linalg::adjoint(&g, n);
        let conj: Vec<Vec<C64>> = xs.iter().map(|x| linalg::conjugate(&g, x, &gi, n)).collect();
        let conj_args: Vec<&[C64]> = conj.iter().map(|x| x.as_slice()).collect();
        prop_assert!((f.evaluate_matrices(&conj_args, n).unwrap() - base).norm() < 1e-12);
    }

    #[test]
    fn winding_is_integral_and_additive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, ka) = random_based_loop(&mut r, 2, 64, 3, 3).unwrap();
        let (b, kb) = random_based_loop(&mut r, 2, 64, 3, 3).unwrap();
        let wa = a.winding_number().unwrap();
        prop_assert_eq!(wa.value, ka);
        prop_assert!(wa.distance <= 1e-9);
        prop_assert_eq!(a.pointwise_product(&b).unwrap().winding_number().unwrap().value, ka + kb);
        prop_assert_eq!(a.block_sum(&b).unwrap().winding_number().unwrap().value, ka + kb);
        prop_assert!(a.log_derivative().unwrap().skew_defect() < 1e-10);
    }

    #[test]
    fn reduction_lands_in_half_open_interval(r in -1e6f64..1e6) {
        let m = reduce_mod_one(r);
        prop_assert!((-0.5..0.5).contains(&m));
        let k = r - m;
        prop_assert!((k - k.round()).abs() < 1e-6);
    }

    #[test]
    fn beta_identity_holds_exactly(k in 1usize..=coefficients::MAX_DEGREE) {
        prop_assert_eq!(coefficients::beta_alternating_sum(k).unwrap(), coefficients::beta_kk(k).unwrap());
    }
}

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn d_squared_and_stokes_on_circles(seed in any::<u64>(), degree in 0usize..=1) {
        let mesh = Arc::new(Mesh::torus(&[16, 16, 8]).unwrap());
        let w = random_form(&mut rng(seed), &mesh, degree, 2, 2).unwrap();
        prop_assert!(w.d().d().max_abs() < 1e-10);
        let top = random_form(&mut rng(seed ^ 1), &mesh, 2, 1, 2).unwrap();
        prop_assert!(top.d().integrate_top_scalar().unwrap().norm() < 1e-10);
    }

    #[test]
    fn fiber_integration_commutes_with_d(seed in any::<u64>(), degree in 1usize..=2) {
        let mesh = loop_mesh(&Mesh::torus(&[8, 8]).unwrap(), 16).unwrap();
        let w = random_form(&mut rng(seed), &mesh, degree, 1, 2).unwrap();
        let lhs = w.fiber_integrate(2).unwrap().d();
        let rhs = w.d().fiber_integrate(2).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn gauge_action_is_covariant(seed in any::<u64>()) {
        // the transformed data must stay resolved on the grid, hence 16 x 16 x 32
        let base = Mesh::torus(&[16, 16]).unwrap();
        let mut r = rng(seed);
        let p = random_pair(&mut r, &base, PairShape { n_theta: 32, ..Default::default() }).unwrap();
        let gamma = random_based_gauge(&mut r, &base, 32, 2, 1).unwrap();
        let (q, _) = p.gauge_transform(&gamma).unwrap();
        let g = gamma.values();
        let gi = gamma.inverse().unwrap();
        let ad = |x: &MatrixForm| gi.values().wedge(x).unwrap().wedge(g).unwrap();
        prop_assert!(q.connection().curvature().unwrap().distance(&ad(&p.connection().curvature().unwrap())).unwrap() < 1e-9);
        prop_assert!(q.higgs_cov_derivative().unwrap().distance(&ad(&p.higgs_cov_derivative().unwrap())).unwrap() < 1e-9);
        prop_assert!(q.connection().is_based().unwrap() == p.connection().is_based().unwrap());
    }

    #[test]
    fn caloron_transform_round_trips(seed in any::<u64>()) {
        let base = Mesh::torus(&[8]).unwrap();
        let p = random_pair(&mut rng(seed), &base, PairShape::default()).unwrap();
        let back = GaugePair::inverse_caloron_transform(p.spec(), &p.caloron_transform().unwrap()).unwrap();
        prop_assert_eq!(back.distance(&p).unwrap(), 0.0);
    }

    #[test]
    fn total_potential_is_a_primitive(seed in any::<u64>()) {
        let base = Mesh::torus(&[16, 16]).unwrap();
        let p = random_pair(&mut rng(seed), &base, PairShape::default()).unwrap();
        let f = SymTrace::new(1).unwrap();
        let ds = string_potential_total(f, &p).unwrap().d();
        prop_assert!(ds.distance(&string_form(f, &p).unwrap()).unwrap() < 1e-8);
    }

    #[test]
    fn twz_curvature_respects_group_laws(seed in any::<u64>()) {
        let mesh = Arc::new(Mesh::torus(&[8, 8]).unwrap());
        let mut r = rng(seed);
        let element = |r: &mut rand_chacha::ChaCha8Rng, n: usize| {
            let g = UnitaryTrigMap::random(r, n, &[1, 1], 2).sample(&mesh).unwrap();
            let chi = random_form(r, &mesh, 0, 1, 1).unwrap();
            let chi = chi.add(&chi.adjoint()).unwrap().scale_real(0.5);
            TwzElement::new(g, GradedForm::from_parts([chi]).unwrap()).unwrap()
        };
        let (a, b) = (element(&mut r, 2), element(&mut r, 1));
        let fa = a.curvature(None).unwrap();
        let fb = b.curvature(None).unwrap();
        prop_assert!(a.combine(&b).unwrap().curvature(None).unwrap().distance(&fa.add(&fb).unwrap()).unwrap() < 1e-10);
        prop_assert!(a.inverse().unwrap().curvature(None).unwrap().add(&fa).unwrap().max_abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(cases(4))]

    #[test]
    fn holonomy_is_gauge_invariant_and_unitary(seed in any::<u64>()) {
        let base = Mesh::torus(&[8, 8]).unwrap();
        let mut r = rng(seed);
        let p = random_pair(&mut r, &base, PairShape { n_theta: 32, ..Default::default() }).unwrap();
        let gamma = random_based_gauge(&mut r, &base, 32, 2, 1).unwrap();
        let (q, _) = p.gauge_transform(&gamma).unwrap();
        let opts = HolonomyOptions::default();
        let h0 = higgs_holonomy(p.higgs(), opts).unwrap();
        let h1 = higgs_holonomy(q.higgs(), opts).unwrap();
        prop_assert!(h0.holonomy.values().distance(h1.holonomy.values()).unwrap() < 1e-7);
        prop_assert!(h0.unitarity_defect() < 1e-8);
    }
}
