use proptest::prelude::*;
use rug::Rational;

use dhtlab::{FiniteSeq, PiGraded};

fn rational() -> impl Strategy<Value = Rational> {
    (-30i64..=30, 1i64..=12).prop_map(|(n, d)| Rational::from((n, d)))
}

fn graded() -> impl Strategy<Value = PiGraded> {
    prop::collection::vec((0u32..4, rational()), 0..4).prop_map(PiGraded::from_terms)
}

fn seq() -> impl Strategy<Value = FiniteSeq> {
    prop::collection::vec((-6i64..=6, rational()), 0..6).prop_map(FiniteSeq::from_rationals)
}

fn ulp(x: f64) -> f64 {
    if x == 0.0 {
        f64::MIN_POSITIVE
    } else {
        f64::EPSILON * x.abs()
    }
}

proptest! {
    #[test]
    fn ring_axioms(x in graded(), y in graded(), z in graded()) {
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x + &PiGraded::zero(), x.clone());
        prop_assert_eq!(&x * &PiGraded::one(), x.clone());
        prop_assert!((&x - &x).is_zero());
    }

    #[test]
    fn float_evaluation_is_additive(x in graded(), y in graded()) {
        let (fx, fy) = (x.to_f64(), y.to_f64());
        let fs = (&x + &y).to_f64();
        let scale = fx.abs().max(fy.abs()).max(fs.abs());
        prop_assert!((fs - (fx + fy)).abs() <= 4.0 * ulp(scale), "{} vs {}", fs, fx + fy);
    }

    #[test]
    fn pointwise_product_laws(a in seq(), b in seq(), c in seq()) {
        prop_assert_eq!(a.pointwise_mul(&b), b.pointwise_mul(&a));
        prop_assert_eq!(a.pointwise_mul(&b).pointwise_mul(&c), a.pointwise_mul(&b.pointwise_mul(&c)));
    }

    #[test]
    fn norm_vanishes_only_on_empty_support(a in seq(), p in 1.0f64..8.0) {
        let n = a.lp_norm(p).unwrap();
        prop_assert_eq!(n == 0.0, a.support().next().is_none());
    }
}

#[test]
fn json_round_trip() {
    let a = FiniteSeq::from_rationals([(-3, Rational::from((7, 2))), (4, Rational::from(-1))]);
    let text = a.to_json().unwrap();
    assert_eq!(FiniteSeq::from_json(&text).unwrap(), a);
    assert!(FiniteSeq::from_json("[[0, 1, 0]]").is_err());
    assert!(FiniteSeq::from_json("[[0, 1, 1], [0, 2, 1]]").is_err());
}
