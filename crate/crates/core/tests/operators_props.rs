use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;

use dhtlab::operators::{
    apply_certified, apply_exact, check_interleaving, check_partial_fraction, check_product_rule,
    check_sign_identity, Decay, ExactImage, OperatorKind, SeqGenerator,
};
use dhtlab::{FiniteSeq, PiGraded};

fn rational(bound: i64) -> impl Strategy<Value = Rational> {
    (-bound * 9..=bound * 9, 1i64..=9).prop_map(|(n, d)| Rational::from((n, d)))
}

fn seq(max_support: usize) -> impl Strategy<Value = FiniteSeq> {
    prop::collection::btree_map(-8i64..=8, rational(10), 0..=max_support)
        .prop_map(|m| FiniteSeq::from_rationals(m))
}

fn op() -> impl Strategy<Value = OperatorKind> {
    prop_oneof![
        Just(OperatorKind::R),
        Just(OperatorKind::K),
        Just(OperatorKind::H0),
        Just(OperatorKind::H),
        Just(OperatorKind::I),
    ]
}

proptest! {
    #[test]
    fn parity_of_kernels(j in -20i64..=20, n in -20i64..=20) {
        let d = FiniteSeq::delta(j);
        let k = apply_exact(&OperatorKind::K, &d, n).unwrap();
        if (n - j) % 2 == 0 {
            prop_assert!(k.is_zero());
        } else {
            prop_assert!(!k.is_zero());
        }
        let h = apply_exact(&OperatorKind::H, &d, n).unwrap();
        if (n - j) % 2 != 0 || n == j {
            prop_assert!(h.is_zero());
        }
    }

    #[test]
    fn grade_shift_is_homogeneous(op in op(), a in seq(6), n in -12i64..=12) {
        let v = apply_exact(&op, &a, n).unwrap();
        let shift = if op == OperatorKind::I { 2 } else { 1 };
        prop_assert!(v.grades().all(|g| g == shift));
    }

    #[test]
    fn exact_application_is_linear(
        op in op(),
        a in seq(5),
        b in seq(5),
        alpha in rational(5),
        beta in rational(5),
        n in -12i64..=12,
    ) {
        let combo = a.scale(&alpha).add(&b.scale(&beta));
        let lhs = apply_exact(&op, &combo, n).unwrap();
        let rhs = apply_exact(&op, &a, n).unwrap().scale(&alpha) + apply_exact(&op, &b, n).unwrap().scale(&beta);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn interleaving_residuals_vanish(a in seq(6)) {
        prop_assert!(check_interleaving(&a, -10, 10).unwrap().is_zero());
    }

    #[test]
    fn partial_fraction_within_bound(h in 1i64..=40, neg in any::<bool>()) {
        let j = if neg { -2 * h } else { 2 * h };
        prop_assert!(check_partial_fraction(j, 4000).unwrap().holds());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn product_rule_is_exact(a in seq(8), b in seq(8)) {
        prop_assert!(check_product_rule(&a, &b, -64, 64).unwrap().is_zero());
    }
}

#[test]
fn sign_identity_on_a_thousand_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 1000 {
        let den = rng.gen_range(1..=48i64);
        let u = Rational::from((rng.gen_range(-3 * den..=3 * den), den));
        let v = Rational::from((rng.gen_range(-3 * den..=3 * den), den));
        match check_sign_identity(&u, &v) {
            Ok(r) => {
                assert_eq!(r, 0, "u = {u}, v = {v}");
                checked += 1;
            }
            Err(dhtlab::Error::SymbolJump(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn sign_identity_rejects_jumps() {
    let half = Rational::from((1, 2));
    assert!(check_sign_identity(&Rational::new(), &half).is_err());
    assert!(check_sign_identity(&half, &half).is_err());
    assert!(check_sign_identity(&Rational::from(1), &half).is_err());
}

fn bounds_shrink(op: &OperatorKind, a: &dyn SeqGenerator, n: i64) {
    let mut last = f64::INFINITY;
    for m in [8u64, 16, 64, 256, 1024, 8192] {
        if let Ok(v) = apply_certified(op, a, n, m) {
            assert!(v.bound >= 0.0);
            assert!(v.bound <= last, "{op} at M = {m}: {} > {last}", v.bound);
            last = v.bound;
        }
    }
    assert!(last.is_finite());
}

#[test]
fn certified_bounds_are_monotone_in_truncation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let a = dhtlab::seq::random_rational_seq(&mut rng, 5, 6, 4);
        let n = rng.gen_range(-4..=4);
        for op in [OperatorKind::R, OperatorKind::K, OperatorKind::H, OperatorKind::I] {
            bounds_shrink(&op, &a, n);
        }
        if a.is_zero() {
            continue;
        }
        let ka = ExactImage::new(OperatorKind::K, &a).unwrap();
        assert!(matches!(ka.decay(), Decay::Harmonic(_)));
        bounds_shrink(&OperatorKind::I, &ka, n);
        bounds_shrink(&OperatorKind::K, &ka, n);
    }
}

#[test]
fn certified_matches_exact_on_finite_input() {
    let a = FiniteSeq::from_rationals([(0, Rational::from(1)), (3, Rational::from((-2, 3)))]);
    for op in [OperatorKind::K, OperatorKind::I, OperatorKind::R] {
        for n in -5..=5 {
            let exact: PiGraded = apply_exact(&op, &a, n).unwrap();
            let v = apply_certified(&op, &a, n, 64).unwrap();
            assert!(v.contains(exact.to_f64()));
        }
    }
}
