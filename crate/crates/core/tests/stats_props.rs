use annihilate::stats::{dkw_epsilon, dkw_equality_test, dominance_check, SampleSummary};
use proptest::prelude::*;

proptest! {
    #[test]
    fn equality_is_symmetric(
        a in prop::collection::vec(0.0f64..100.0, 1..200),
        b in prop::collection::vec(0.0f64..100.0, 1..200),
    ) {
        let ab = dkw_equality_test(&a, &b, 0.05).unwrap();
        let ba = dkw_equality_test(&b, &a, 0.05).unwrap();
        prop_assert!((ab.statistic - ba.statistic).abs() < 1e-12);
        prop_assert_eq!(ab.pass, ba.pass);
        prop_assert!(ab.statistic >= 0.0 && ab.statistic <= 1.0);
    }

    #[test]
    fn sample_dominates_itself(a in prop::collection::vec(-50.0f64..50.0, 1..300)) {
        prop_assert!(dominance_check(&a, &a, 0.01).unwrap().pass);
        prop_assert!(dkw_equality_test(&a, &a, 0.01).unwrap().pass);
    }

    #[test]
    fn shifted_sample_dominates(a in prop::collection::vec(0.0f64..10.0, 1..300), shift in 0.0f64..5.0) {
        let up: Vec<f64> = a.iter().map(|x| x + shift).collect();
        prop_assert!(dominance_check(&up, &a, 0.01).unwrap().pass);
    }

    #[test]
    fn merge_matches_sequential(
        a in prop::collection::vec(-1e3f64..1e3, 0..100),
        b in prop::collection::vec(-1e3f64..1e3, 0..100),
    ) {
        let sa: SampleSummary = a.iter().copied().collect();
        let sb: SampleSummary = b.iter().copied().collect();
        let all: SampleSummary = a.iter().chain(&b).copied().collect();
        let merged = sa.merge(&sb);
        prop_assert_eq!(merged.count(), all.count());
        if all.count() > 0 {
            prop_assert!((merged.mean() - all.mean()).abs() <= 1e-9 * (1.0 + all.mean().abs()));
        }
        if all.count() > 1 {
            prop_assert!((merged.variance() - all.variance()).abs() <= 1e-7 * (1.0 + all.variance()));
        }
    }
}

#[test]
fn epsilon_shrinks_with_sample_size() {
    assert!(dkw_epsilon(100, 0.01) > dkw_epsilon(10_000, 0.01));
    assert!((dkw_epsilon(20_000, 0.01) - ((2.0f64 / 0.01).ln() / 40_000.0).sqrt()).abs() < 1e-15);
}
