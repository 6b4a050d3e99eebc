use nlss_core::grading::Grading;
use nlss_core::rational::{GaussQ, Rational};
use nlss_core::rmatrix::{r_quantum, yang_baxter_residual};
use nlss_core::tensor::{super_permutation, GradedTensor};
use proptest::prelude::*;

fn grading() -> impl Strategy<Value = Grading> {
    (1usize..=3).prop_flat_map(|t| (0..=t).prop_map(move |n| Grading::new(t - n, n)))
}

fn gq() -> impl Strategy<Value = GaussQ> {
    (-9i64..=9, 1i64..=5, -9i64..=9, 1i64..=5).prop_map(|(a, b, c, d)| GaussQ::new(Rational::new(a, b), Rational::new(c, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn permutation_squares_to_identity(g in grading()) {
        let p = super_permutation::<GaussQ>(g);
        prop_assert!(p.mul(&p).sub(&GradedTensor::identity(&[g, g])).is_zero());
    }

    #[test]
    fn yang_baxter_exact(g in grading(), u in gq(), v in gq(), c in 1i64..=4) {
        let coupling = GaussQ::frac(c, 3);
        // skip the poles k + ig = 0
        let i = GaussQ::i().mul(&coupling);
        prop_assume!(!u.add(&i).is_zero() && !v.add(&i).is_zero() && !u.sub(&v).add(&i).is_zero());
        prop_assert!(yang_baxter_residual(&u, &v, &coupling, g).unwrap().is_zero());
    }

    #[test]
    fn unitarity_exact(g in grading(), k in gq()) {
        let coupling = GaussQ::frac(1, 2);
        let i = GaussQ::i().mul(&coupling);
        prop_assume!(!k.add(&i).is_zero() && !k.neg().add(&i).is_zero());
        let r = r_quantum(&k, &coupling, g).unwrap();
        let r21 = r_quantum(&k.neg(), &coupling, g).unwrap().permute(&[1, 0]);
        prop_assert!(r.mul(&r21).sub(&GradedTensor::identity(&[g, g])).is_zero());
    }
}
