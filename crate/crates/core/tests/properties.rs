use proptest::prelude::*;

use woldkit_core::bandop::gram;
use woldkit_core::seqspace::{inner, orthonormalize};
use woldkit_core::wold::{analytic_criterion, decompose, nested_project, projection_residuals, reducing_residual, wandering_basis};
use woldkit_core::{c64, zoo, Axis, BandOp, FinVec, GramSolveParams, Lattice, PhiFamily, WeightFn, C64};

fn fixtures() -> Vec<(&'static str, BandOp)> {
    let (t1, t2) = zoo::tensor_pair(WeightFn::Bergman, WeightFn::Dirichlet).unwrap();
    let l = vec![vec![c64(1.2, 0.0), c64(0.0, 0.1)], vec![c64(0.0, -0.1), c64(1.0, 0.0)]];
    vec![
        ("unilateral", zoo::unilateral_shift()),
        ("bilateral", zoo::bilateral_shift()),
        ("bergman", zoo::bergman_shift()),
        ("dirichlet", zoo::dirichlet_shift()),
        ("translation_exp", zoo::weighted_translation(PhiFamily::Exp { alpha: 1.0 }, 1.0, 1.0).unwrap()),
        ("translation_pow", zoo::weighted_translation(PhiFamily::Power { beta: 2.0 }, 2.0, 1.0).unwrap()),
        ("step3", zoo::weighted_shift(WeightFn::Bergman, 3, Axis::Natural).unwrap()),
        ("quasinormal_diag", zoo::quasinormal_block(&[vec![c64(2.0, 0.0), c64(0.0, 0.0)], vec![c64(0.0, 0.0), c64(3.0, 0.0)]]).unwrap()),
        ("quasinormal_full", zoo::quasinormal_block(&l).unwrap()),
        ("tensor_t1", t1),
        ("tensor_t2", t2),
        ("bilateral_plus_unilateral", zoo::direct_sum(&zoo::bilateral_shift(), &zoo::unilateral_shift()).unwrap()),
    ]
}

/// Up to `max_support` entries on the first 24 lattice points.
fn vec_on(lattice: &Lattice, max_support: usize) -> impl Strategy<Value = FinVec> {
    let pool = lattice.first_points(24);
    let rank = lattice.rank();
    prop::collection::vec((0..pool.len(), -1.0f64..1.0, -1.0f64..1.0), 1..=max_support).prop_map(move |es| {
        let mut v = FinVec::zeros(rank);
        for (i, re, im) in es {
            v.add_at(pool[i], C64::new(re, im));
        }
        v
    })
}

fn fixture_and_vectors() -> impl Strategy<Value = (usize, FinVec, FinVec)> {
    let n = fixtures().len();
    (0..n).prop_flat_map(|i| {
        let op = fixtures().swap_remove(i).1;
        (Just(i), vec_on(op.lattice(), 6), vec_on(op.lattice(), 6))
    })
}

fn p() -> GramSolveParams {
    GramSolveParams::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adjoint_pairing((i, u, v) in fixture_and_vectors()) {
        let t = &fixtures()[i].1;
        let lhs = inner(&t.apply(&u).unwrap(), &v).unwrap();
        let rhs = inner(&u, &t.adjoint().apply(&v).unwrap()).unwrap();
        let scale = 1.0 + t.apply(&u).unwrap().norm() * v.norm();
        prop_assert!((lhs - rhs).norm() <= 1e-13 * scale);
    }

    #[test]
    fn adjoint_is_involutive((i, u, _v) in fixture_and_vectors()) {
        let t = &fixtures()[i].1;
        let tt = t.adjoint().adjoint();
        prop_assert!((&tt.apply(&u).unwrap() - &t.apply(&u).unwrap()).norm() <= 1e-14 * (1.0 + u.norm()));
    }

    #[test]
    fn composition_is_associative((i, u, _v) in fixture_and_vectors()) {
        let t = &fixtures()[i].1;
        let ts = t.adjoint();
        let a = BandOp::compose(&BandOp::compose(t, &ts).unwrap(), t).unwrap();
        let b = BandOp::compose(t, &BandOp::compose(&ts, t).unwrap()).unwrap();
        let direct = t.apply(&ts.apply(&t.apply(&u).unwrap()).unwrap()).unwrap();
        let (ya, yb) = (a.apply(&u).unwrap(), b.apply(&u).unwrap());
        let scale = 1e-13 * (1.0 + direct.norm());
        prop_assert!((&ya - &direct).norm() <= scale);
        prop_assert!((&yb - &direct).norm() <= scale);
    }

    #[test]
    fn scaling_scales_norms((i, u, _v) in fixture_and_vectors(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let t = &fixtures()[i].1;
        let c = C64::new(re, im);
        let lhs = t.scale(c).apply(&u).unwrap().norm();
        let rhs = c.norm() * t.apply(&u).unwrap().norm();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + rhs));
    }

    #[test]
    fn gram_is_positive((i, u, _v) in fixture_and_vectors()) {
        let t = &fixtures()[i].1;
        let q = inner(&gram(t).apply(&u).unwrap(), &u).unwrap();
        let tu = t.apply(&u).unwrap().norm();
        prop_assert!((q.re - tu * tu).abs() <= 1e-13 * (1.0 + tu * tu));
        prop_assert!(q.im.abs() <= 1e-13 * (1.0 + tu * tu));
    }

    #[test]
    fn projection_laws((i, u, v) in fixture_and_vectors(), n in 0usize..4) {
        let t = &fixtures()[i].1;
        let r = projection_residuals(t, n, &u, &v, &p()).unwrap();
        prop_assert!(r.idempotence <= 1e-11, "{}: {:?}", fixtures()[i].0, r);
        prop_assert!(r.symmetry <= 1e-11, "{}: {:?}", fixtures()[i].0, r);
        prop_assert!(r.nestedness <= 1e-11, "{}: {:?}", fixtures()[i].0, r);
        prop_assert!(r.monotonicity <= 1e-11, "{}: {:?}", fixtures()[i].0, r);
    }

    #[test]
    fn reducing_identity((i, u, _v) in fixture_and_vectors(), n in 0usize..4) {
        let t = &fixtures()[i].1;
        prop_assert!(reducing_residual(t, &u, n, &p()).unwrap() <= 1e-11);
    }

    #[test]
    fn criterion_matches_projection_norm((i, u, _v) in fixture_and_vectors(), n in 1usize..5) {
        let t = &fixtures()[i].1;
        let a = analytic_criterion(t, &u, n, &p()).unwrap().value;
        let b = nested_project(t, n, &u, &p()).unwrap().norm();
        prop_assert!((a - b).abs() <= 1e-10 * u.norm(), "{}: {a} vs {b}", fixtures()[i].0);
    }

    #[test]
    fn decomposition_reconstructs((i, u, _v) in fixture_and_vectors()) {
        let t = &fixtures()[i].1;
        let r = decompose(t, &u, &p(), 64, 256).unwrap();
        prop_assert!(r.reconstruction_residual <= 1e-10 * u.norm(), "{}: {}", fixtures()[i].0, r.reconstruction_residual);
        prop_assert!(r.max_cross_inner <= 1e-10 * u.norm() * u.norm());
    }

    #[test]
    fn orthonormalize_gives_orthonormal_vectors(vs in prop::collection::vec(vec_on(&Lattice::natural(), 5), 1..6)) {
        let q = orthonormalize(&vs, 1e-10);
        prop_assert!(q.len() <= vs.len());
        for a in 0..q.len() {
            for b in 0..q.len() {
                let g = inner(&q[a], &q[b]).unwrap();
                let expect = if a == b { 1.0 } else { 0.0 };
                prop_assert!((g - C64::new(expect, 0.0)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn inner_product_is_hermitian(u in vec_on(&Lattice::natural(), 8), v in vec_on(&Lattice::natural(), 8)) {
        let a = inner(&u, &v).unwrap();
        let b = inner(&v, &u).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-15 * (1.0 + u.norm() * v.norm()));
        prop_assert!(a.norm() <= u.norm() * v.norm() * (1.0 + 1e-15));
    }
}

#[test]
fn wandering_subspaces_are_wandering() {
    for (name, t) in fixtures() {
        let w = wandering_basis(&t, 12, 1e-12);
        let mut worst: f64 = 0.0;
        for u in &w {
            for v in &w {
                let mut tu = u.clone();
                for m in 0..=10usize {
                    let mut tv = t.apply_power(m + 1, v).unwrap();
                    for _n in (m + 1)..=10 {
                        worst = worst.max(inner(&tu, &tv).unwrap().norm() / (tu.norm() * tv.norm()).max(1.0));
                        tv = t.apply(&tv).unwrap();
                    }
                    tu = t.apply(&tu).unwrap();
                }
            }
        }
        assert!(worst <= 1e-10, "{name}: {worst}");
    }
}
