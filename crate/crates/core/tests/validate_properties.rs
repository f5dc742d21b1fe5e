//! Property tests for histograms and divergences.

use proptest::prelude::*;

use twinway::validate::{
    accuracy, bhattacharyya, build_histogram, js_divergence, kl_divergence, wasserstein1, MAX_BINS,
    MIN_BINS,
};

fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..45.0f64, 2..300)
}

proptest! {
    #[test]
    fn histograms_share_edges_and_are_normalised(a in samples(), b in samples()) {
        let (ha, hb) = build_histogram(&a, &b).unwrap();
        prop_assert_eq!(ha.edges(), hb.edges());
        prop_assert!((MIN_BINS..=MAX_BINS).contains(&ha.bins()));
        for h in [&ha, &hb] {
            let total: f64 = h.probabilities().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(h.probabilities().iter().all(|&p| p > 0.0));
        }
        let lo = a.iter().chain(&b).copied().fold(f64::MAX, f64::min);
        let hi = a.iter().chain(&b).copied().fold(f64::MIN, f64::max);
        prop_assert!(ha.edges()[0] <= lo);
        prop_assert!(*ha.edges().last().unwrap() >= hi);
    }

    #[test]
    fn divergences_are_nonnegative_and_bounded(a in samples(), b in samples()) {
        let (ha, hb) = build_histogram(&a, &b).unwrap();
        prop_assert!(kl_divergence(&ha, &hb).unwrap() >= 0.0);
        let js = js_divergence(&ha, &hb).unwrap();
        prop_assert!((0.0..=std::f64::consts::LN_2).contains(&js));
        prop_assert!(bhattacharyya(&ha, &hb).unwrap() >= 0.0);
        let span = ha.edges().last().unwrap() - ha.edges()[0];
        let w = wasserstein1(&ha, &hb).unwrap();
        prop_assert!(w >= 0.0 && w <= span);
    }

    #[test]
    fn symmetric_metrics_are_symmetric(a in samples(), b in samples()) {
        let (ha, hb) = build_histogram(&a, &b).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs());
        prop_assert!(close(js_divergence(&ha, &hb).unwrap(), js_divergence(&hb, &ha).unwrap()));
        prop_assert!(close(wasserstein1(&ha, &hb).unwrap(), wasserstein1(&hb, &ha).unwrap()));
        prop_assert!(close(bhattacharyya(&ha, &hb).unwrap(), bhattacharyya(&hb, &ha).unwrap()));
    }

    #[test]
    fn identical_samples_have_zero_divergence(a in samples()) {
        let (ha, hb) = build_histogram(&a, &a).unwrap();
        prop_assert!(kl_divergence(&ha, &hb).unwrap().abs() < 1e-12);
        prop_assert!(js_divergence(&ha, &hb).unwrap().abs() < 1e-12);
        prop_assert!(wasserstein1(&ha, &hb).unwrap().abs() < 1e-12);
        prop_assert!(bhattacharyya(&ha, &hb).unwrap().abs() < 1e-12);
    }

    #[test]
    fn shift_moves_wasserstein_by_about_the_shift(a in prop::collection::vec(20.0..35.0f64, 50..300), shift in 0.5..5.0f64) {
        let b: Vec<f64> = a.iter().map(|x| x - shift).collect();
        let (ha, hb) = build_histogram(&a, &b).unwrap();
        let w = wasserstein1(&ha, &hb).unwrap();
        prop_assert!((w - shift).abs() <= ha.bin_width(), "w {} shift {} width {}", w, shift, ha.bin_width());
    }

    #[test]
    fn accuracy_is_100_at_equality_and_drops_with_error(r in 0.1..100.0f64, e in 0.0..1.0f64) {
        prop_assert_eq!(accuracy(r, r), Some(100.0));
        let up = accuracy(r * (1.0 + e), r).unwrap();
        let down = accuracy(r * (1.0 - e), r).unwrap();
        prop_assert!((up - 100.0 * (1.0 - e)).abs() < 1e-9);
        prop_assert!((down - up).abs() < 1e-9);
    }
}
