//! Seeded experiments and instance generators. Every randomized path draws
//! from one `ChaCha8Rng` per run, so output is fixed by `(config, seed)`.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::dilation::{erdos_guarantee, extract_dilate_exhaustive};
use crate::error::{check_k, invalid, Error, Result};
use crate::folner::FolnerGrid;
use crate::nat::{fmt_decimal, fmt_rational, FiniteSet, Nat, Rational};
use crate::periodic::{find_ap, DensityDropInstance, FlsInstance, HorizonSet};
use crate::solver::{max_k_sum_free, Algorithm, SolveStatus};
use crate::sumfree::k_difference_set;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `size` distinct integers drawn uniformly from `[1, max]`.
pub fn random_set(rng: &mut ChaCha8Rng, size: usize, max: u64) -> Result<FiniteSet> {
    if size as u64 > max {
        return Err(invalid(format!("cannot draw {size} distinct values from [1, {max}]")));
    }
    let mut picked = std::collections::BTreeSet::new();
    while picked.len() < size {
        picked.insert(rng.gen_range(1..=max));
    }
    FiniteSet::from_u64s(picked)
}

/// Greedy k-sum-free set in `[start, horizon]`: each candidate is offered in
/// increasing order and accepted with probability `keep` (as `num/den`) when
/// it is not a k-fold sum of earlier picks.
pub fn greedy_sum_free(rng: &mut ChaCha8Rng, k: usize, start: u64, horizon: u64, keep: (u32, u32)) -> Result<FiniteSet> {
    check_k(k)?;
    if start == 0 || start > horizon {
        return Err(invalid("greedy construction needs 1 <= start <= horizon"));
    }
    let len = horizon as usize + 1;
    // sums[j]: j-fold sums of accepted elements, truncated at the horizon
    let mut sums: Vec<BitSet> = (0..=k).map(|_| BitSet::new(len)).collect();
    sums[0].set(0);
    let mut picked = Vec::new();
    for a in start..=horizon {
        if sums[k].get(a as usize) || !rng.gen_ratio(keep.0, keep.1) {
            continue;
        }
        picked.push(a);
        for j in 1..=k {
            let (lo, hi) = sums.split_at_mut(j);
            hi[0].or_shifted(&lo[j - 1], a as usize);
        }
    }
    FiniteSet::from_u64s(picked)
}

fn nat(v: u64) -> Nat {
    Nat::from_u64(v)
}

/// `n_j = n_{j-1} * ratio`, starting from `n0`.
pub fn geometric_schedule(n0: &Nat, ratio: &BigUint, len: usize) -> Vec<Nat> {
    let mut out = Vec::with_capacity(len);
    let mut v = n0.get().clone();
    for _ in 0..len {
        v *= ratio;
        out.push(Nat::new(v.clone()).expect("positive"));
    }
    out
}

fn ceil_ratio(r: &Rational) -> BigUint {
    r.ceil().to_integer().to_biguint().expect("positive ratio").max(BigUint::one())
}

const EPS_CHOICES: [(i64, i64); 5] = [(1, 2), (1, 10), (1, 50), (1, 100), (1, 1000)];

/// A hypothesis-satisfying input for the density-drop lemma, built from a
/// greedy k-sum-free set.
pub fn random_density_drop_instance(rng: &mut ChaCha8Rng, k: usize) -> Result<DensityDropInstance> {
    check_k(k)?;
    loop {
        let horizon = rng.gen_range(200..=6000u64);
        let start = rng.gen_range(1..=12u64);
        let keep = (rng.gen_range(2..=4u32), 4);
        let set = greedy_sum_free(rng, k, start, horizon, keep)?;
        let n0 = rng.gen_range(start.max(10)..=60u64.min(horizon));
        let n0 = nat(n0);
        let mut i = rng.gen_range(1..=4u64);
        let ap = loop {
            if let Some(ap) = find_ap(&set, &n0, i, 60)? {
                break Some(ap);
            }
            if i == 1 {
                break None;
            }
            i -= 1;
        };
        let Some((x, m)) = ap else { continue };
        let xb = x.to_bigint();
        let mb = BigInt::from(m);
        let candidates: Vec<BigInt> = k_difference_set(&set, k, &n0)?
            .into_iter()
            .filter(|d| d != &xb && ((d - &xb) % &mb) == BigInt::from(0))
            .collect();
        let Some(d) = candidates.choose(rng).cloned() else { continue };
        let (p, q) = *EPS_CHOICES.choose(rng).expect("nonempty");
        let eps = Rational::new(p.into(), q.into());
        let ratio = ceil_ratio(&(Rational::one() / &eps)) * BigUint::from(rng.gen_range(1..=3u32));
        let len = k * n0.to_u64().expect("small n0") as usize;
        let schedule = geometric_schedule(&n0, &ratio, len);
        return Ok(DensityDropInstance {
            set: HorizonSet::complete(set),
            k,
            n0,
            x,
            m,
            i,
            d,
            eps,
            schedule,
        });
    }
}

/// Input for the translate-counting inequality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarInstance {
    pub set: FiniteSet,
    pub k: usize,
    pub n: Nat,
    pub x: Nat,
    pub m: u64,
    pub i: u64,
}

pub fn random_star_instance(rng: &mut ChaCha8Rng, k: usize) -> Result<StarInstance> {
    check_k(k)?;
    loop {
        let horizon = rng.gen_range(50..=3000u64);
        let start = rng.gen_range(1..=12u64).min(horizon);
        let keep = (rng.gen_range(2..=4u32), 4);
        let set = greedy_sum_free(rng, k, start, horizon, keep)?;
        let i = rng.gen_range(1..=6u64);
        let q = *[6u64, 12, 60, 2520].choose(rng).expect("nonempty");
        let Some((x, m)) = find_ap(&set, &nat(horizon), i, q)? else { continue };
        let n = nat(rng.gen_range(1..=horizon + 10));
        return Ok(StarInstance { set, k, n, x, m, i });
    }
}

/// A k-sum-free set dense at `n0`, with parameters satisfying every
/// hypothesis of one density-increment step.
pub fn random_fls_instance(rng: &mut ChaCha8Rng, k: usize) -> Result<FlsInstance> {
    check_k(k)?;
    let base = Rational::new(BigInt::one(), BigInt::from(k + 1));
    loop {
        let horizon = rng.gen_range(100..=2000u64);
        let start = rng.gen_range(1..=6u64);
        let keep = (rng.gen_range(3..=4u32), 4);
        let set = greedy_sum_free(rng, k, start, horizon, keep)?;
        let n0 = nat(rng.gen_range(start.max(6)..=30));
        let d0 = Rational::new(BigInt::from(set.count_le(&n0)), n0.to_bigint());
        if d0 <= base {
            continue;
        }
        let eps = (d0 - &base) / Rational::from_integer(BigInt::from(rng.gen_range(1..=3u32)));
        let ratio = ceil_ratio(&(Rational::from_integer(BigInt::from(16 * k)) / &eps));
        let len = k * n0.to_u64().expect("small n0") as usize;
        return Ok(FlsInstance {
            schedule: geometric_schedule(&n0, &ratio, len),
            set: HorizonSet::complete(set),
            k,
            n0,
            modulus: *[2u64, 3, 4, 5, 6, 12].choose(rng).expect("nonempty"),
            i: rng.gen_range(1..=3),
            eps,
        });
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioRow {
    pub m: usize,
    pub cardinality: BigUint,
    pub max_size: usize,
    pub fraction: Rational,
    pub status: SolveStatus,
    pub nodes: u64,
    pub wall_time: Duration,
}

/// Maximum k-sum-free fraction of `F_m` for `m = 1..=m_max`. A resource
/// limit turns into a row with an Erdős lower bound and
/// `timeout-lower-bound` status.
pub fn run_ratio_experiment(k: usize, m_max: usize, budget: Duration) -> Result<Vec<RatioRow>> {
    check_k(k)?;
    if m_max == 0 {
        return Err(invalid("m_max must be at least 1"));
    }
    let mut rows = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let grid = FolnerGrid::diagonal(m)?;
        let cardinality = grid.cardinality();
        let started = Instant::now();
        let (max_size, status, nodes) = match grid.generate() {
            Ok(set) => match max_k_sum_free(&set, k, Algorithm::BranchAndBound, budget, false) {
                Ok(r) => (r.size, r.status, r.nodes_explored),
                Err(Error::ResourceLimit { .. }) => {
                    (extract_dilate_exhaustive(&set, k)?.score, SolveStatus::TimeoutLowerBound, 0)
                }
                Err(e) => return Err(e),
            },
            Err(Error::ResourceLimit { .. }) => (0, SolveStatus::TimeoutLowerBound, 0),
            Err(e) => return Err(e),
        };
        let fraction = Rational::new(BigInt::from(max_size), BigInt::from(cardinality.clone()));
        rows.push(RatioRow {
            m,
            cardinality,
            max_size,
            fraction,
            status,
            nodes,
            wall_time: started.elapsed(),
        });
    }
    Ok(rows)
}

/// CSV rendering; `wall_time_ms` is `NA` unless `timing` is set, which keeps
/// the default output byte-identical across runs.
pub fn ratio_csv(rows: &[RatioRow], timing: bool) -> String {
    let mut out = String::from("m,cardinality,max_size,fraction,fraction_decimal,status,solver_nodes,wall_time_ms\n");
    for r in rows {
        let wall = if timing { r.wall_time.as_millis().to_string() } else { "NA".into() };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.m,
            r.cardinality,
            r.max_size,
            fmt_rational(&r.fraction),
            fmt_decimal(&r.fraction, 6),
            r.status,
            r.nodes,
            wall
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectRow {
    pub m: usize,
    pub defect: Rational,
    pub closed_form: Rational,
}

impl DefectRow {
    pub fn matches(&self) -> bool {
        self.defect == self.closed_form
    }
}

/// Defect of `F_m` under multiplication by `a`, by enumeration and in closed
/// form, for `m = 1..=m_max`.
pub fn run_defect_experiment(a: &Nat, m_max: usize) -> Result<Vec<DefectRow>> {
    if m_max == 0 {
        return Err(invalid("m_max must be at least 1"));
    }
    (1..=m_max)
        .map(|m| {
            let grid = FolnerGrid::diagonal(m)?;
            Ok(DefectRow {
                m,
                defect: grid.defect(a),
                closed_form: grid.defect_closed_form(a),
            })
        })
        .collect()
}

pub fn defect_csv(rows: &[DefectRow]) -> String {
    let mut out = String::from("m,defect,defect_decimal,closed_form,match\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.m,
            fmt_rational(&r.defect),
            fmt_decimal(&r.defect, 6),
            fmt_rational(&r.closed_form),
            r.matches()
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractionRow {
    pub trial: usize,
    pub n: usize,
    pub extracted: usize,
    pub guarantee: usize,
}

impl ExtractionRow {
    pub fn meets_guarantee(&self) -> bool {
        self.extracted >= self.guarantee
    }
}

/// Largest element drawn by the extraction experiment.
pub const EXTRACTION_MAX_ELEMENT: u64 = 1_000_000;

/// Exhaustive extraction on `trials` random sets of `size` elements in
/// `[1, 10^6]`.
pub fn run_extraction_experiment(k: usize, trials: usize, size: usize, seed: u64) -> Result<Vec<ExtractionRow>> {
    check_k(k)?;
    if trials == 0 || size == 0 {
        return Err(invalid("trials and size must be at least 1"));
    }
    let mut rng = rng(seed);
    (0..trials)
        .map(|trial| {
            let set = random_set(&mut rng, size, EXTRACTION_MAX_ELEMENT)?;
            let r = extract_dilate_exhaustive(&set, k)?;
            Ok(ExtractionRow {
                trial,
                n: set.len(),
                extracted: r.score,
                guarantee: erdos_guarantee(set.len(), k),
            })
        })
        .collect()
}

/// `sum extracted / sum n` over all rows.
pub fn mean_extracted_fraction(rows: &[ExtractionRow]) -> Rational {
    let got: usize = rows.iter().map(|r| r.extracted).sum();
    let total: usize = rows.iter().map(|r| r.n).sum();
    Rational::new(BigInt::from(got), BigInt::from(total.max(1)))
}

pub fn extraction_csv(rows: &[ExtractionRow]) -> String {
    let mut out = String::from("trial,n,extracted_size,guarantee,meets_guarantee\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.trial, r.n, r.extracted, r.guarantee, r.meets_guarantee());
    }
    let mean = mean_extracted_fraction(rows);
    let _ = writeln!(out, "mean,{},{},,", fmt_rational(&mean), fmt_decimal(&mean, 6));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nat::rat;
    use crate::periodic::{check_inequality_star, fls_step, verify_density_drop, FlsOutcome};
    use crate::sumfree::is_k_sum_free;

    #[test]
    fn greedy_sets_are_sum_free() {
        let mut r = rng(7);
        for k in 2..5 {
            for _ in 0..5 {
                let s = greedy_sum_free(&mut r, k, 1, 500, (3, 4)).unwrap();
                assert!(is_k_sum_free(&s, k).unwrap());
                assert!(!s.is_empty());
            }
        }
        // keep-everything greedy from 1 gives the odd numbers at k = 2
        let s = greedy_sum_free(&mut r, 2, 1, 30, (1, 1)).unwrap();
        assert_eq!(s, FiniteSet::from_u64s((1..=30).filter(|v| v % 2 == 1)).unwrap());
    }

    #[test]
    fn ratio_rows() {
        let rows = run_ratio_experiment(2, 2, Duration::from_secs(30)).unwrap();
        assert_eq!((rows[0].max_size, rows[0].fraction.clone()), (1, rat(1, 1)));
        assert_eq!((rows[1].cardinality.clone(), rows[1].max_size), (BigUint::from(4u32), 2));
        assert_eq!(rows[1].status, SolveStatus::Optimal);
        let csv = ratio_csv(&rows, false);
        assert!(csv.contains("\n2,4,2,1/2,0.500000,optimal,"));
        assert!(csv.contains("\n1,1,1,1/1,1.000000,optimal,"));
        let rows = run_ratio_experiment(3, 2, Duration::from_secs(30)).unwrap();
        assert_eq!((rows[1].max_size, rows[1].fraction.clone()), (2, rat(1, 2)));
    }

    #[test]
    fn defect_rows() {
        let rows = run_defect_experiment(&Nat::from_u64(2), 5).unwrap();
        let d: Vec<Rational> = rows[1..].iter().map(|r| r.defect.clone()).collect();
        assert_eq!(d, vec![rat(1, 1), rat(2, 3), rat(1, 2), rat(2, 5)]);
        assert!(rows.iter().all(DefectRow::matches));
        let rows = run_defect_experiment(&Nat::one(), 4).unwrap();
        assert!(rows.iter().all(|r| r.defect == rat(0, 1)));
        let rows = run_defect_experiment(&Nat::from_u64(7), 3).unwrap();
        assert_eq!(rows[1].defect, rat(2, 1));
        assert_eq!(rows[2].defect, rat(2, 1));
    }

    #[test]
    fn extraction_rows() {
        let rows = run_extraction_experiment(2, 100, 30, 11).unwrap();
        assert!(rows.iter().all(ExtractionRow::meets_guarantee));
        assert!(mean_extracted_fraction(&rows) > rat(1, 3));
        let rows = run_extraction_experiment(3, 5, 1, 3).unwrap();
        assert!(rows.iter().all(|r| r.extracted == 1));
        let a = extraction_csv(&run_extraction_experiment(2, 10, 12, 5).unwrap());
        let b = extraction_csv(&run_extraction_experiment(2, 10, 12, 5).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn generated_instances_verify() {
        let mut r = rng(2024);
        for k in [2, 3] {
            for _ in 0..10 {
                let inst = random_density_drop_instance(&mut r, k).unwrap();
                assert!(verify_density_drop(&inst).unwrap(), "{}", inst.to_json());
                let star = random_star_instance(&mut r, k).unwrap();
                assert!(check_inequality_star(&star.set, &star.n, &star.x, star.m, star.i, k).unwrap());
                let fls = random_fls_instance(&mut r, k).unwrap();
                assert!(!matches!(fls_step(&fls).unwrap(), FlsOutcome::Falsified(_)));
            }
        }
    }
}
