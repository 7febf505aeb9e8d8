use std::collections::BTreeSet;

use num_bigint::BigInt;
use proptest::prelude::*;

use sumfree_core::sumfree::{
    find_violation, is_k_sum_free, is_k_sum_free_naive, is_k_sum_free_with_cap, is_strongly_k_sum_free,
    k_difference_set, u_witness,
};
use sumfree_core::{FiniteSet, Nat};

fn small_set(max: u64, len: usize) -> impl Strategy<Value = FiniteSet> {
    prop::collection::btree_set(1..=max, 0..=len).prop_map(|s| FiniteSet::from_u64s(s).unwrap())
}

proptest! {
    #[test]
    fn subsets_of_sum_free_sets_are_sum_free(
        (a, mask) in small_set(80, 14).prop_flat_map(|a| {
            let n = a.len();
            (Just(a), prop::collection::vec(any::<bool>(), n))
        }),
        k in 2usize..=4,
    ) {
        let b = FiniteSet::new(a.iter().zip(&mask).filter(|(_, &m)| m).map(|(x, _)| x.clone()).collect());
        if is_k_sum_free(&a, k).unwrap() {
            prop_assert!(is_k_sum_free(&b, k).unwrap());
        }
    }

    #[test]
    fn dilation_preserves_sum_freeness(a in small_set(60, 10), c in 1u64..=40, k in 2usize..=4) {
        let dilated = a.dilate(&Nat::from_u64(c));
        prop_assert_eq!(is_k_sum_free(&dilated, k).unwrap(), is_k_sum_free(&a, k).unwrap());
    }

    #[test]
    fn violations_are_sound(a in small_set(60, 12), k in 2usize..=4) {
        match find_violation(&a, k).unwrap() {
            Some(v) => {
                prop_assert_eq!(v.summands.len(), k);
                prop_assert!(v.summands.windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(v.is_valid_for(&a));
                prop_assert!(!is_k_sum_free(&a, k).unwrap());
            }
            None => prop_assert!(is_k_sum_free(&a, k).unwrap()),
        }
    }

    #[test]
    fn fast_paths_match_enumeration(a in small_set(50, 12), k in 2usize..=4) {
        let naive = is_k_sum_free_naive(&a, k).unwrap();
        prop_assert_eq!(is_k_sum_free(&a, k).unwrap(), naive);
        prop_assert_eq!(is_k_sum_free_with_cap(&a, k, 0).unwrap(), naive);
    }

    #[test]
    fn u_witness_exists_exactly_on_the_difference_set(a in small_set(30, 7), k in 2usize..=3, t in -60i64..=30) {
        let top = match a.max() {
            Some(m) => m.clone(),
            None => return Ok(()),
        };
        let diffs = k_difference_set(&a, k, &top).unwrap();
        let t = BigInt::from(t);
        let w = u_witness(&a, &t, k).unwrap();
        prop_assert_eq!(w.is_some(), diffs.contains(&t));
        if let Some(u) = w {
            prop_assert!(a.contains(&u));
        }
    }

    #[test]
    fn strong_is_the_conjunction(a in small_set(60, 10), k in 2usize..=5) {
        let each = (2..=k).all(|l| is_k_sum_free(&a, l).unwrap());
        prop_assert_eq!(is_strongly_k_sum_free(&a, k).unwrap(), each);
    }
}

#[test]
fn exhaustive_agreement_on_small_universes() {
    // every subset of {1..14}, which covers the dense corner of the |A| <= 12 range
    for mask in 0u32..(1 << 14) {
        let a = FiniteSet::from_u64s((0..14).filter(|i| mask >> i & 1 == 1).map(|i| i + 1)).unwrap();
        for k in 2..=4 {
            assert_eq!(is_k_sum_free(&a, k).unwrap(), is_k_sum_free_naive(&a, k).unwrap(), "{a:?} k={k}");
        }
    }
}

#[test]
fn difference_set_contains_the_obvious_elements() {
    let a = FiniteSet::from_u64s([3, 5, 9]).unwrap();
    let d: BTreeSet<BigInt> = k_difference_set(&a, 2, &Nat::from_u64(9)).unwrap();
    for (u, v) in [(3, 3), (9, 5), (5, 9)] {
        assert!(d.contains(&BigInt::from(u - v)));
    }
}
