//! Property tests tying the residuals, the quadric form and the word
//! coefficient tables together.

mod common;

use cfet_core::conditions::{quadric_residuals, residuals_order5};
use cfet_core::linalg::{is_positive_definite, symmetric_pivots};
use cfet_core::scalar::rat;
use cfet_core::scheme::{centered_prefix_sums, DerivedCoefficients};
use cfet_core::taylor::{oracle_residuals, word_coefficients_closed, word_coefficients_recursive, Word};
use cfet_core::{Rational, Scalar};
use common::exact;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-30i64..=30, 1i64..=12).prop_map(|(p, q)| rat(p, q))
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=30, 1i64..=12).prop_map(|(p, q)| rat(p, q))
}

fn weights(max: usize) -> impl Strategy<Value = (Vec<Rational>, Vec<Rational>)> {
    (1..=max)
        .prop_flat_map(|n| (prop::collection::vec(small_rational(), n), prop::collection::vec(small_rational(), n)))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn prefix_sums_telescope(v in prop::collection::vec(small_rational(), 1..8)) {
        let h = centered_prefix_sums(&exact(&v));
        let total: Rational = v.iter().sum();
        let last = h.last().unwrap().as_exact().unwrap() + &v[v.len() - 1] / rat(2, 1);
        prop_assert_eq!(last, total);
        for j in 1..v.len() {
            let step = h[j].as_exact().unwrap() - h[j - 1].as_exact().unwrap();
            prop_assert_eq!(step, (&v[j] + &v[j - 1]) / rat(2, 1));
        }
    }

    #[test]
    fn quadric_is_positive_definite_for_positive_weights(b in prop::collection::vec(positive_rational(), 1..8)) {
        let dc = DerivedCoefficients::from_weights(exact(&b), exact(&b)).unwrap();
        let s = dc.s.map(|x| x.as_exact().unwrap().clone());
        prop_assert!(s.is_symmetric());
        prop_assert!(is_positive_definite(&s));
        prop_assert!(symmetric_pivots(&s).iter().all(|p| *p > Rational::zero()));
    }

    #[test]
    fn quadric_form_matches_scalar_residuals((b, y) in weights(6)) {
        let dc = DerivedCoefficients::from_weights(exact(&b), exact(&y)).unwrap();
        let r = residuals_order5(&dc);
        let [q0, q1, q2] = quadric_residuals(&dc);
        prop_assert_eq!(q0, r.r_sum_y);
        prop_assert_eq!(q1, r.r_bhat3);
        prop_assert_eq!(q2, r.r_quad);
    }

    #[test]
    fn recursive_and_closed_tables_agree((b, y) in weights(6)) {
        let rec = word_coefficients_recursive(&exact(&b), &exact(&y)).unwrap();
        let closed = word_coefficients_closed(&exact(&b), &exact(&y)).unwrap();
        for w in Word::subset() {
            prop_assert_eq!(&rec.entries[&w], &closed.entries[&w], "word {}", w);
        }
    }

    #[test]
    fn oracle_residuals_equal_direct((b, y) in weights(6)) {
        let dc = DerivedCoefficients::from_weights(exact(&b), exact(&y)).unwrap();
        prop_assert_eq!(oracle_residuals(&exact(&b), &exact(&y)).unwrap(), residuals_order5(&dc));
    }

    #[test]
    fn coefficients_are_graded((b, y) in weights(4), lambda in positive_rational()) {
        let base = word_coefficients_recursive(&exact(&b), &exact(&y)).unwrap();
        let lb: Vec<Rational> = b.iter().map(|x| x * &lambda).collect();
        let ly: Vec<Rational> = y.iter().map(|x| x * &lambda * &lambda).collect();
        let scaled = word_coefficients_recursive(&exact(&lb), &exact(&ly)).unwrap();
        for (w, c) in &base.entries {
            let factor = (0..w.weight()).fold(Rational::one(), |acc, _| acc * &lambda);
            prop_assert_eq!(scaled.entries[w].clone(), c.clone() * Scalar::Exact(factor));
        }
    }
}
