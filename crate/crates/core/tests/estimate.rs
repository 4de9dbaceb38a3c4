use proptest::prelude::*;

use dhtlab::estimate::{
    doubling_study, indicator_lower_bound, parseval_norm_check, power_iterate, sharp_f64, Start,
    WindowedOperator,
};
use dhtlab::operators::OperatorKind;
use dhtlab::FloatWindow;

fn op() -> impl Strategy<Value = OperatorKind> {
    prop_oneof![
        Just(OperatorKind::R),
        Just(OperatorKind::K),
        Just(OperatorKind::H0),
        Just(OperatorKind::H),
        Just(OperatorKind::I),
        Just(OperatorKind::T("1/3".parse().unwrap())),
    ]
}

fn max_abs(x: &FloatWindow) -> f64 {
    x.as_slice().iter().fold(0.0, |m, v| m.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fast_and_direct_paths_agree(op in op(), n in 1usize..160, seed in any::<u64>()) {
        let w = WindowedOperator::new(op, n).unwrap();
        let x = Start::Random.window(n, 2.0, seed);
        let (a, b) = (w.apply_direct(&x).unwrap(), w.apply_fft(&x).unwrap());
        let scale = max_abs(&a).max(1e-300);
        for (u, v) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((u - v).abs() <= 1e-10 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hilbert_ratios_stay_below_the_sharp_constant(p in 1.2f64..9.0, seed in 0u64..1000) {
        let w = WindowedOperator::new(OperatorKind::H, 200).unwrap();
        let r = power_iterate(&w, p, 15, seed).unwrap();
        prop_assert!(r.best_ratio <= sharp_f64(p) + 1e-6);
        prop_assert!(r.curve.windows(2).all(|c| c[0] <= c[1]));
    }
}

#[test]
fn even_exponents_stay_below_the_sharp_constant() {
    for p in [2.0, 4.0, 6.0, 8.0] {
        for op in [OperatorKind::K, OperatorKind::R] {
            let w = WindowedOperator::new(op.clone(), 512).unwrap();
            let r = power_iterate(&w, p, 25, 3).unwrap();
            assert!(r.best_ratio <= sharp_f64(p) + 1e-6, "{op} at p = {p}: {}", r.best_ratio);
        }
    }
}

#[test]
fn doubling_never_loses_ground() {
    let study = doubling_study(&OperatorKind::K, 4.0, &[64, 128, 256, 512], 15, 2).unwrap();
    for pair in study.windows(2) {
        assert!(pair[1].best_ratio >= pair[0].best_ratio - 1e-12);
    }
}

#[test]
fn riesz_titchmarsh_and_kak_hilbert_agree_at_two() {
    let k = power_iterate(&WindowedOperator::new(OperatorKind::K, 1024).unwrap(), 2.0, 60, 4).unwrap();
    let r = power_iterate(&WindowedOperator::new(OperatorKind::R, 1024).unwrap(), 2.0, 60, 4).unwrap();
    assert!((k.best_ratio - r.best_ratio).abs() < 1e-3, "{} vs {}", k.best_ratio, r.best_ratio);
}

#[test]
fn l2_norm_of_k_is_one() {
    let w = WindowedOperator::new(OperatorKind::K, 2048).unwrap();
    let r = power_iterate(&w, 2.0, 60, 1).unwrap();
    assert!(r.best_ratio >= 0.999 && r.best_ratio <= 1.0 + 1e-9, "{}", r.best_ratio);
}

#[test]
fn probability_kernel_has_norm_near_one() {
    let w = WindowedOperator::new(OperatorKind::I, 8192).unwrap();
    let r = power_iterate(&w, 3.0, 10, 1).unwrap();
    assert!(r.best_ratio >= 0.99 && r.best_ratio <= 1.0 + 1e-9, "{}", r.best_ratio);
}

#[test]
fn parseval_probe() {
    for op in [OperatorKind::K, OperatorKind::H] {
        let r = parseval_norm_check(&op, 4096, 50, 17).unwrap();
        assert!(r <= 1.0 + 1e-8);
    }
    assert!(parseval_norm_check(&OperatorKind::I, 16, 1, 0).is_err());
}

#[test]
fn indicator_bound_grows_with_margin() {
    let mut last = 0.0;
    for k in [1u64, 5, 25, 125, 625] {
        let v = indicator_lower_bound(&OperatorKind::I, 2.5, 1_000_000, k).unwrap();
        assert!(v > last && v < 1.0);
        last = v;
    }
    let k1 = indicator_lower_bound(&OperatorKind::I, 1.0, 1_000_000, 1).unwrap();
    assert!((k1 - 0.8106).abs() < 1e-4);
}

#[test]
fn reports_are_reproducible() {
    let w = WindowedOperator::new(OperatorKind::H0, 300).unwrap();
    let a = power_iterate(&w, 3.0, 10, 77).unwrap();
    let b = power_iterate(&w, 3.0, 10, 77).unwrap();
    assert_eq!(a.best_ratio.to_bits(), b.best_ratio.to_bits());
    assert_eq!(a.best, b.best);
}
