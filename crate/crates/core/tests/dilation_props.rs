use num_bigint::BigInt;
use proptest::prelude::*;

use sumfree_core::dilation::{
    circle_pullback, erdos_guarantee, erdos_interval, extract_dilate_exhaustive, extract_dilate_sampled,
};
use sumfree_core::sumfree::is_k_sum_free;
use sumfree_core::{FiniteSet, Nat, Rational};

fn set(max: u64, len: usize) -> impl Strategy<Value = FiniteSet> {
    prop::collection::btree_set(1..=max, 1..=len).prop_map(|s| FiniteSet::from_u64s(s).unwrap())
}

/// Best pullback size over every breakpoint `(j + e)/a` of the arc and every
/// midpoint between consecutive breakpoints, built without the library sweep.
fn dense_maximum(a: &FiniteSet, k: usize) -> usize {
    let s = erdos_interval(k).unwrap();
    let mut points: Vec<Rational> = vec![Rational::from_integer(0.into())];
    for x in a {
        let xr = Rational::from_integer(x.to_bigint());
        for j in 0..x.to_u64().unwrap() {
            for e in [&s.lo, &s.hi] {
                points.push((Rational::from_integer(BigInt::from(j)) + e) / &xr);
            }
        }
    }
    points.push(Rational::from_integer(1.into()));
    points.sort();
    points.dedup();
    let two = Rational::from_integer(2.into());
    let mut best = 0;
    for w in points.windows(2) {
        for x in [w[0].clone(), (&w[0] + &w[1]) / &two] {
            best = best.max(circle_pullback(a, &x, &s).len());
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extraction_is_sum_free_and_meets_the_guarantee(a in set(1_000_000, 40), k in 2usize..=5) {
        let out = extract_dilate_exhaustive(&a, k).unwrap();
        prop_assert!(out.subset.is_subset(&a));
        prop_assert!(is_k_sum_free(&out.subset, k).unwrap());
        prop_assert_eq!(out.score, out.subset.len());
        prop_assert!(out.score >= erdos_guarantee(a.len(), k));
    }

    #[test]
    fn sweep_finds_the_dense_maximum(a in set(30, 8), k in 2usize..=4) {
        prop_assert_eq!(extract_dilate_exhaustive(&a, k).unwrap().score, dense_maximum(&a, k));
    }

    #[test]
    fn sampling_never_beats_the_sweep(a in set(100, 20), k in 2usize..=4, seed in any::<u64>()) {
        let exact = extract_dilate_exhaustive(&a, k).unwrap();
        let sampled = extract_dilate_sampled(&a, k, 10_000, seed).unwrap();
        prop_assert!(sampled.score <= exact.score);
        prop_assert!(is_k_sum_free(&sampled.subset, k).unwrap());
    }

    #[test]
    fn score_is_invariant_under_dilation(a in set(300, 16), c in 2u64..=50, k in 2usize..=4) {
        let base = extract_dilate_exhaustive(&a, k).unwrap().score;
        let scaled = extract_dilate_exhaustive(&a.dilate(&Nat::from_u64(c)), k).unwrap().score;
        prop_assert_eq!(base, scaled);
    }
}
