//! Extraction of k-sum-free subsets by dilation.
//!
//! All three variants pull a k-sum-free target back along `a ↦ a·x`:
//! the open arc of length `1/(k+1)` centred at `1/(2k-2)` on the circle, a
//! k-sum-free subset of a multiplicative Følner set, and the same with
//! elements weighted by a finitely supported measure.

pub mod sweep;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_k, invalid, Result};
use crate::folner::set_defect;
use crate::measures::RationalMeasure;
use crate::nat::{rat_int, FiniteSet, Nat, Rational};
use crate::sumfree::is_k_sum_free;

pub use sweep::SweepOutcome;

/// Open arc `(lo, hi)` of the circle `R/Z`, `0 <= lo < hi <= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl OpenInterval {
    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        x > &self.lo && x < &self.hi
    }
}

/// A dilation extraction: the chosen dilator, the pulled-back subset, its
/// score, and the lower bound the averaging argument promises for the score.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionResult<D, S> {
    pub dilator: D,
    pub subset: FiniteSet,
    pub score: S,
    pub bound: Rational,
}

/// `(1/(2k-2) - 1/(2k+2), 1/(2k-2) + 1/(2k+2))`.
pub fn erdos_interval(k: usize) -> Result<OpenInterval> {
    check_k(k)?;
    let k = k as i64;
    let centre = Rational::new(1.into(), (2 * k - 2).into());
    let half = Rational::new(1.into(), (2 * k + 2).into());
    Ok(OpenInterval {
        lo: &centre - &half,
        hi: centre + half,
    })
}

/// Whether the k-fold sum arc `(k·lo, k·hi) mod 1` misses `(lo, hi)`.
pub fn interval_is_k_sum_free(k: usize) -> Result<bool> {
    let s = erdos_interval(k)?;
    let kr = rat_int(k as i64);
    let start = sweep::frac(&(&kr * &s.lo));
    let end = &start + &kr * s.length();
    let one = rat_int(1);
    let overlaps = |a: &Rational, b: &Rational| a.max(&s.lo) < b.min(&s.hi);
    if end <= one {
        Ok(!overlaps(&start, &end))
    } else {
        let wrapped = &end - &one;
        Ok(!overlaps(&start, &one) && !overlaps(&Rational::zero(), &wrapped))
    }
}

/// `{a in A : {a·x} in S}`.
pub fn circle_pullback(set: &FiniteSet, x: &Rational, s: &OpenInterval) -> FiniteSet {
    set.filter(|a| sweep::lands_in(&a.to_bigint(), x, &s.lo, &s.hi))
}

/// Maximises `|A_x|` over every `x in R/Z` exactly, returning the midpoint of
/// the first maximising cell. `bound` is `|A|/(k+1)`; the score is at least
/// its ceiling.
pub fn extract_dilate_exhaustive(set: &FiniteSet, k: usize) -> Result<ExtractionResult<Rational, usize>> {
    check_k(k)?;
    if set.is_empty() {
        return Err(invalid("extraction needs a nonempty set"));
    }
    let s = erdos_interval(k)?;
    let outcome = match sweep::Arc::from_rationals(&s.lo, &s.hi) {
        Some(arc) if sweep::fast_path_applies(set, &arc) => sweep::fast_sweep(set, &arc),
        _ => sweep::reference_sweep(set, &s.lo, &s.hi)?,
    };
    let dilator = outcome.midpoint();
    let subset = circle_pullback(set, &dilator, &s);
    assert_eq!(
        subset.len(),
        outcome.value,
        "sweep value disagrees with direct evaluation at {dilator}"
    );
    assert!(
        is_k_sum_free(&subset, k)?,
        "pullback of the sum-free arc is not {k}-sum-free: {subset:?}"
    );
    Ok(ExtractionResult {
        dilator,
        subset,
        score: outcome.value,
        bound: Rational::new((set.len() as i64).into(), (k as i64 + 1).into()),
    })
}

/// `ceil(n/(k+1))`, the size every exhaustive extraction reaches.
pub fn erdos_guarantee(n: usize, k: usize) -> usize {
    n.div_ceil(k + 1)
}

/// Best of `samples` seeded dyadic dilators `r/2^32`. No guarantee attaches
/// to the result.
pub fn extract_dilate_sampled(
    set: &FiniteSet,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<ExtractionResult<Rational, usize>> {
    check_k(k)?;
    if set.is_empty() {
        return Err(invalid("extraction needs a nonempty set"));
    }
    if samples == 0 {
        return Err(invalid("samples must be positive"));
    }
    let s = erdos_interval(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let denom = BigInt::from(1u64 << 32);
    let mut best: Option<(usize, Rational)> = None;
    for _ in 0..samples {
        let r: u32 = rng.gen();
        let x = Rational::new(BigInt::from(r), denom.clone());
        let score = circle_pullback(set, &x, &s).len();
        if best.as_ref().map_or(true, |(b, _)| score > *b) {
            best = Some((score, x));
        }
    }
    let (score, dilator) = best.unwrap();
    let subset = circle_pullback(set, &dilator, &s);
    Ok(ExtractionResult {
        dilator,
        subset,
        score,
        bound: Rational::new((set.len() as i64).into(), (k as i64 + 1).into()),
    })
}

fn check_target(f: &FiniteSet, s: &FiniteSet, k: usize) -> Result<()> {
    check_k(k)?;
    if f.is_empty() {
        return Err(invalid("the Følner set must be nonempty"));
    }
    if !s.is_subset(f) {
        return Err(invalid("the sum-free target is not a subset of the Følner set"));
    }
    if !is_k_sum_free(s, k)? {
        return Err(invalid(format!("the target subset is not {k}-sum-free")));
    }
    Ok(())
}

/// `{a in A : a·x in S}`.
pub fn multiplicative_pullback(set: &FiniteSet, x: &Nat, target: &FiniteSet) -> FiniteSet {
    set.filter(|a| target.contains_big(&(a.get() * x.get())))
}

/// Tries every `x in F` and keeps the smallest maximiser of `|A_x|`.
/// `bound = (|S|/|F|)·|A| − Σ_{a in A} |(aF) △ F|/|F|`.
pub fn extract_dilate_folner(
    set: &FiniteSet,
    folner: &FiniteSet,
    target: &FiniteSet,
    k: usize,
) -> Result<ExtractionResult<Nat, usize>> {
    check_target(folner, target, k)?;
    if set.is_empty() {
        return Err(invalid("extraction needs a nonempty set"));
    }
    let mut best: Option<(usize, &Nat)> = None;
    for x in folner {
        let score = multiplicative_pullback(set, x, target).len();
        if best.map_or(true, |(b, _)| score > b) {
            best = Some((score, x));
        }
    }
    let (score, x) = best.expect("nonempty Følner set");
    let subset = multiplicative_pullback(set, x, target);
    assert!(is_k_sum_free(&subset, k)?, "pullback of a sum-free set is not sum-free");
    let delta = Rational::new((target.len() as i64).into(), (folner.len() as i64).into());
    let defects: Rational = set.iter().map(|a| set_defect(folner, a)).sum();
    Ok(ExtractionResult {
        dilator: x.clone(),
        subset,
        score,
        bound: delta * rat_int(set.len() as i64) - defects,
    })
}

/// Like [`extract_dilate_folner`] over the support of `mu`, scoring by
/// `mu(A_x)`. `bound = |S|/|F| − max_{a <= n} |(aF) △ F|/|F|` with `n` the
/// support maximum.
pub fn extract_dilate_measure(
    folner: &FiniteSet,
    target: &FiniteSet,
    mu: &RationalMeasure,
    k: usize,
) -> Result<ExtractionResult<Nat, Rational>> {
    check_target(folner, target, k)?;
    let support = mu.support();
    let mut best: Option<(Rational, &Nat)> = None;
    for x in folner {
        let score = mu.evaluate(&multiplicative_pullback(&support, x, target));
        if best.as_ref().map_or(true, |(b, _)| &score > b) {
            best = Some((score, x));
        }
    }
    let (score, x) = best.expect("nonempty Følner set");
    let subset = multiplicative_pullback(&support, x, target);
    assert!(is_k_sum_free(&subset, k)?, "pullback of a sum-free set is not sum-free");
    let delta = Rational::new((target.len() as i64).into(), (folner.len() as i64).into());
    let n = mu.support_max().and_then(|m| m.to_u64()).unwrap_or(0);
    let eps = (1..=n)
        .map(|a| set_defect(folner, &Nat::from_u64(a)))
        .max()
        .unwrap_or_else(Rational::zero);
    Ok(ExtractionResult {
        dilator: x.clone(),
        subset,
        score,
        bound: delta - eps,
    })
}
