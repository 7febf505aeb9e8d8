//! Predicates and set algebra for k-sum-free sets.
//!
//! A set `A` is k-sum-free when no `a_1 + ... + a_k` with every `a_i in A`
//! (repetition allowed) lies in `A`.

use std::collections::BTreeSet;
use std::ops::{Add, Sub};

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{check_k, Result};
use crate::nat::{FiniteSet, Nat};

/// Sets whose maximum is at most this use the bitset sumset path.
pub const DEFAULT_BITSET_CAP: u64 = 1 << 20;

/// A witness that a set is not k-sum-free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Exactly `k` summands in non-decreasing order.
    pub summands: Vec<Nat>,
    pub total: Nat,
}

impl Violation {
    /// Re-checks the certificate against `set`.
    pub fn is_valid_for(&self, set: &FiniteSet) -> bool {
        let sum = self
            .summands
            .iter()
            .fold(BigUint::zero(), |acc, s| acc + s.get());
        &sum == self.total.get()
            && set.contains(&self.total)
            && self.summands.iter().all(|s| set.contains(s))
    }
}

pub fn is_k_sum_free(set: &FiniteSet, k: usize) -> Result<bool> {
    is_k_sum_free_with_cap(set, k, DEFAULT_BITSET_CAP)
}

/// Uses shifted-OR sumsets when `max(A) <= bitset_cap`, multiset enumeration
/// otherwise.
pub fn is_k_sum_free_with_cap(set: &FiniteSet, k: usize, bitset_cap: u64) -> Result<bool> {
    check_k(k)?;
    if set.is_empty() {
        return Ok(true);
    }
    match set.to_u64s() {
        Some(values) if *values.last().unwrap() <= bitset_cap => {
            Ok(bitset_is_k_sum_free(&values, k))
        }
        _ => Ok(find_violation_unchecked(set, k).is_none()),
    }
}

fn bitset_is_k_sum_free(values: &[u64], k: usize) -> bool {
    let max = *values.last().unwrap() as usize;
    let mut members = BitSet::new(max + 1);
    for &v in values {
        members.set(v as usize);
    }
    let mut sums = members.clone();
    for _ in 1..k {
        let mut next = BitSet::new(max + 1);
        for &v in values {
            if v as usize > max {
                break;
            }
            next.or_shifted(&sums, v as usize);
        }
        sums = next;
        if sums.is_empty() {
            return true;
        }
    }
    !sums.intersects(&members)
}

/// Reference predicate: plain enumeration of non-decreasing k-tuples.
pub fn is_k_sum_free_naive(set: &FiniteSet, k: usize) -> Result<bool> {
    check_k(k)?;
    let values: Vec<BigUint> = set.iter().map(|n| n.get().clone()).collect();
    let Some(max) = values.last().cloned() else {
        return Ok(true);
    };
    fn rec(values: &[BigUint], start: usize, left: usize, partial: BigUint, max: &BigUint) -> bool {
        if left == 0 {
            return values.binary_search(&partial).is_err();
        }
        for i in start..values.len() {
            let s = &partial + &values[i];
            if &s > max {
                break;
            }
            if !rec(values, i, left - 1, s, max) {
                return false;
            }
        }
        true
    }
    Ok(rec(&values, 0, k, BigUint::zero(), &max))
}

pub fn is_strongly_k_sum_free(set: &FiniteSet, k: usize) -> Result<bool> {
    check_k(k)?;
    for l in 2..=k {
        if !is_k_sum_free(set, l)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The smallest violation under (total, sorted summands) order, or `None`
/// when the set is k-sum-free.
pub fn find_violation(set: &FiniteSet, k: usize) -> Result<Option<Violation>> {
    check_k(k)?;
    Ok(find_violation_unchecked(set, k))
}

fn find_violation_unchecked(set: &FiniteSet, k: usize) -> Option<Violation> {
    match set.to_u64s() {
        Some(v) => {
            let values: Vec<u128> = v.into_iter().map(u128::from).collect();
            smallest_violation(&values, k).map(|(summands, total)| Violation {
                summands: summands.into_iter().map(nat_from_u128).collect(),
                total: nat_from_u128(total),
            })
        }
        None => {
            let values: Vec<BigUint> = set.iter().map(|n| n.get().clone()).collect();
            smallest_violation(&values, k).map(|(summands, total)| Violation {
                summands: summands.into_iter().map(|b| Nat::new(b).unwrap()).collect(),
                total: Nat::new(total).unwrap(),
            })
        }
    }
}

fn nat_from_u128(v: u128) -> Nat {
    Nat::new(BigUint::from(v)).expect("positive")
}

pub(crate) trait Magnitude: Clone + Ord + Zero + for<'a> Add<&'a Self, Output = Self> + for<'a> Sub<&'a Self, Output = Self> {}
impl<T> Magnitude for T where T: Clone + Ord + Zero + for<'a> Add<&'a T, Output = T> + for<'a> Sub<&'a T, Output = T> {}

fn smallest_violation<T: Magnitude>(values: &[T], k: usize) -> Option<(Vec<T>, T)> {
    let mut chosen = Vec::with_capacity(k);
    for total in values {
        chosen.clear();
        if first_decomposition(values, 0, k, total.clone(), &mut chosen) {
            return Some((chosen.clone(), total.clone()));
        }
    }
    None
}

/// Lexicographically smallest non-decreasing tuple of `count` elements
/// (indices `>= start`) summing to `target`, pushed onto `chosen`.
fn first_decomposition<T: Magnitude>(
    values: &[T],
    start: usize,
    count: usize,
    target: T,
    chosen: &mut Vec<T>,
) -> bool {
    if count == 1 {
        if let Ok(pos) = values[start..].binary_search(&target) {
            chosen.push(values[start + pos].clone());
            return true;
        }
        return false;
    }
    for i in start..values.len() {
        let v = &values[i];
        // the remaining count-1 summands are all >= v
        let mut floor = v.clone();
        for _ in 1..count {
            floor = floor + v;
        }
        if floor > target {
            break;
        }
        chosen.push(v.clone());
        if first_decomposition(values, i, count - 1, target.clone() - v, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

pub(crate) fn is_sum_of<T: Magnitude>(values: &[T], count: usize, target: &T) -> bool {
    let mut scratch = Vec::with_capacity(count);
    first_decomposition(values, 0, count, target.clone(), &mut scratch)
}

/// `A_n - (k-1)A_n = {u - v_1 - ... - v_{k-1}}` over `A_n = A ∩ [1, n]`.
pub fn k_difference_set(set: &FiniteSet, k: usize, n: &Nat) -> Result<BTreeSet<BigInt>> {
    check_k(k)?;
    let window = set.truncate(n);
    let mut sums: BTreeSet<BigInt> = BTreeSet::new();
    sums.insert(BigInt::zero());
    for _ in 1..k {
        let mut next = BTreeSet::new();
        for s in &sums {
            for v in &window {
                next.insert(s + v.to_bigint());
            }
        }
        sums = next;
    }
    let mut out = BTreeSet::new();
    for u in &window {
        let u = u.to_bigint();
        for s in &sums {
            out.insert(&u - s);
        }
    }
    Ok(out)
}

/// The smallest `u in A` with `t = u - v_1 - ... - v_{k-1}` for some `v_i in A`;
/// `None` stands for infinity.
pub fn u_witness(set: &FiniteSet, t: &BigInt, k: usize) -> Result<Option<Nat>> {
    check_k(k)?;
    let values: Vec<BigUint> = set.iter().map(|n| n.get().clone()).collect();
    for u in set {
        let rest = u.to_bigint() - t;
        if let Some(rest) = rest.to_biguint() {
            if !rest.is_zero() && is_sum_of(&values, k - 1, &rest) {
                return Ok(Some(u.clone()));
            }
        }
    }
    Ok(None)
}
