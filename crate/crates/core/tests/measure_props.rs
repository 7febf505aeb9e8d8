use std::cell::RefCell;
use std::collections::BTreeMap;

use num_traits::One;
use proptest::prelude::*;

use sumfree_core::measures::{build_mu, build_nu, contraction_index, mix, uniform_measure, uniform_provider};
use sumfree_core::nat::rat;
use sumfree_core::periodic::{is_residue_k_sum_free, ResidueSet};
use sumfree_core::{FiniteSet, Nat, NuSchedule, Rational, RationalMeasure, Result};

fn nat(v: u64) -> Nat {
    Nat::from_u64(v)
}

fn measure() -> impl Strategy<Value = RationalMeasure> {
    prop::collection::btree_map(1u64..=60, 1i64..=9, 1..=8).prop_map(|w| {
        let total: i64 = w.values().sum();
        let weights: BTreeMap<Nat, Rational> = w.into_iter().map(|(p, c)| (nat(p), rat(c, total))).collect();
        RationalMeasure::from_weights(weights).unwrap()
    })
}

fn set(max: u64, len: usize) -> impl Strategy<Value = FiniteSet> {
    prop::collection::btree_set(1..=max, 0..=len).prop_map(|s| FiniteSet::from_u64s(s).unwrap())
}

/// Averaged uniform measures on `n, 2n, 3n`, one block per point.
fn small_nu(n: &Nat) -> Result<RationalMeasure> {
    let ns = (1..=3u64).map(|j| n.checked_mul(&nat(j))).collect();
    build_nu(&NuSchedule::structural(ns, vec![0, 1, 2], rat(1, 10), 2)?)
}

proptest! {
    #[test]
    fn mixing_is_linear(mu in measure(), nu in measure(), c in 0i64..=12, a in set(60, 20)) {
        let c1 = rat(c, 12);
        let c2 = rat(12 - c, 12);
        let m = mix(&[c1.clone(), c2.clone()], &[mu.clone(), nu.clone()]).unwrap();
        prop_assert!(m.mass().is_one() && m.recomputed_mass().is_one());
        prop_assert_eq!(m.evaluate(&a), c1 * mu.evaluate(&a) + c2 * nu.evaluate(&a));
    }

    #[test]
    fn pushforwards_compose(mu in measure(), q1 in 1u64..=12, q2 in 1u64..=12) {
        let twice = mu.pushforward_scale(&nat(q1)).pushforward_scale(&nat(q2));
        prop_assert_eq!(&twice, &mu.pushforward_scale(&nat(q1 * q2)));
        prop_assert!(twice.recomputed_mass().is_one());
    }

    #[test]
    fn mu_keeps_mass_and_tracks_support(n in 1u64..=15, q in 2u64..=5, k in 2usize..=4, steps in 1usize..=3, nested in any::<bool>()) {
        let requests = RefCell::new(Vec::new());
        let provider = |m: &Nat| {
            let nu = if nested { small_nu(m) } else { uniform_provider(m) }?;
            requests.borrow_mut().push(nu.support_max().unwrap().clone());
            Ok(nu)
        };
        let before = build_mu(&nat(n), steps, &nat(q), k, provider).unwrap();
        requests.borrow_mut().clear();
        let after = build_mu(&nat(n), steps + 1, &nat(q), k, provider).unwrap();
        prop_assert!(before.mass().is_one() && after.recomputed_mass().is_one());
        let last_nu = requests.borrow().last().unwrap().clone();
        let pushed = before.support_max().unwrap().checked_mul(&nat(q));
        prop_assert_eq!(after.support_max().unwrap(), &pushed.max(last_nu));
    }

    #[test]
    fn contraction_index_is_minimal(k in 2usize..=9, q in 3i64..=500) {
        let eps = rat(1, q);
        let i = contraction_index(k, &eps).unwrap();
        let ratio = rat(k as i64, k as i64 + 1);
        let pow = |e: usize| (0..e).fold(rat(1, 1), |acc, _| acc * &ratio);
        prop_assert!(pow(i) <= rat(2, 1) * &eps);
        prop_assert!(i == 1 || pow(i - 1) > rat(2, 1) * &eps);
    }
}

/// Every k-sum-free residue set modulo `q`, as a periodic set, against `μ`
/// built with the same `q` over `contraction_index(k, eps)` steps.
#[test]
fn periodic_corpus_respects_the_measure_bound() {
    // k = 3 at eps = 1/20 needs nine steps, about 5M support points at q = 6
    for (k, eps_list) in [(2usize, vec![rat(1, 10), rat(1, 20)]), (3, vec![rat(1, 10)])] {
        for eps in eps_list {
            let steps = contraction_index(k, &eps).unwrap();
            let bound = rat(1, k as i64 + 1) + rat(4, 1) * &eps;
            for q in 2..=6u64 {
                let mu = build_mu(&nat(3), steps, &nat(q), k, uniform_provider).unwrap();
                let top = mu.support_max().unwrap().to_u64().unwrap();
                for mask in 1u32..(1 << q) {
                    let r = ResidueSet::new(q, (0..q).filter(|i| mask >> i & 1 == 1)).unwrap();
                    if !is_residue_k_sum_free(&r, k).unwrap() {
                        continue;
                    }
                    let a = FiniteSet::from_u64s((1..=top).filter(|x| r.contains_residue(x % q))).unwrap();
                    let value = mu.evaluate(&a);
                    assert!(value <= bound, "k={k} eps={eps} R={r}: mu(A) = {value}");
                }
            }
        }
    }
    // the bound is not vacuous: a uniform measure sees the full density
    let odds = FiniteSet::from_u64s((1..=100).filter(|x| x % 2 == 1)).unwrap();
    assert_eq!(uniform_measure(&nat(100)).unwrap().evaluate(&odds), rat(1, 2));
}
