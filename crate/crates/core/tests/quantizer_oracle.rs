mod oracle;

use iconoclasm::{QuantizedCategorical, SplitMix64};
use proptest::prelude::*;

#[test]
fn reference_case_matches_frozen_oracle() {
    // reference_apportion([0.2, 0.3, 0.5], 16): floors 13107/19660/32768,
    // one unit of shortfall goes to the 0.8 remainder.
    let frozen = vec![13107, 19661, 32768];
    assert_eq!(oracle::reference_apportion(&[0.2, 0.3, 0.5], 16), frozen);
    let q = QuantizedCategorical::new(&[0.2, 0.3, 0.5], 16).unwrap();
    assert_eq!(q.freqs(), frozen);

    let mut next = 0;
    for s in 0..3 {
        let span = q.span_of(s).unwrap();
        assert_eq!(span.start(), next);
        next += span.width();
    }
    assert_eq!(next, 65536);
}

#[test]
fn symbol_of_matches_linear_scan() {
    let mut rng = SplitMix64::new(30);
    let weights: Vec<f64> = (0..30).map(|_| (rng.next() % 1000 + 1) as f64).collect();
    let q = QuantizedCategorical::from_weights(&weights, 12).unwrap();
    let freqs = q.freqs();
    for cum in 0..(1u32 << 12) {
        let mut acc = 0;
        let mut expected = 0;
        for (s, f) in freqs.iter().enumerate() {
            if cum < acc + f {
                expected = s;
                break;
            }
            acc += f;
        }
        assert_eq!(q.symbol_of(cum), expected, "cum {cum}");
    }
}

fn probs_strategy() -> impl Strategy<Value = Vec<f64>> {
    // Mix of dense weights and exact zeros.
    prop::collection::vec(prop_oneof![3 => 0.0f64..1.0, 1 => Just(0.0)], 1..60).prop_filter_map(
        "needs positive mass",
        |w| {
            let sum: f64 = w.iter().sum();
            (sum > 0.0).then(|| w.iter().map(|x| x / sum).collect())
        },
    )
}

proptest! {
    #[test]
    fn table_invariants(p in probs_strategy(), precision in 6u32..=24) {
        prop_assume!(p.len() as u64 <= 1 << precision);
        let q = QuantizedCategorical::new(&p, precision).unwrap();
        let freqs = q.freqs();
        prop_assert_eq!(freqs.iter().map(|&f| u64::from(f)).sum::<u64>(), 1u64 << precision);
        prop_assert!(freqs.iter().all(|&f| f >= 1));
        prop_assert_eq!(&freqs, &oracle::reference_apportion(&p, precision));
        for s in 0..q.len() {
            let span = q.span_of(s).unwrap();
            prop_assert_eq!(q.symbol_of(span.start()), s);
            prop_assert_eq!(q.symbol_of(span.start() + span.width() - 1), s);
        }
        prop_assert_eq!(q, QuantizedCategorical::new(&p, precision).unwrap());
    }

    #[test]
    fn accurate_when_mass_is_not_tiny(
        w in prop::collection::vec(0.1f64..1.0, 1..40),
        precision in 10u32..=24,
    ) {
        let sum: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|x| x / sum).collect();
        let floor = 2f64.powi(1 - precision as i32);
        prop_assume!(p.iter().all(|&x| x >= floor));
        let q = QuantizedCategorical::new(&p, precision).unwrap();
        let scale = (1u64 << precision) as f64;
        for (f, x) in q.freqs().iter().zip(&p) {
            prop_assert!((f64::from(*f) - x * scale).abs() <= 1.0);
        }
    }
}
