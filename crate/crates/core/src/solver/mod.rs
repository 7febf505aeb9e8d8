//! Maximum k-sum-free subsets, computed exactly.

mod bb;
mod brute;
mod hypergraph;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{check_k, invalid, Error, Result};
use crate::folner::FolnerGrid;
use crate::nat::{FiniteSet, Rational};

pub use hypergraph::{build_hypergraph, build_hypergraph_with_cap, ForbiddenHypergraph, DEFAULT_EDGE_CAP};

/// Largest input the brute-force oracle accepts.
pub const BRUTE_MAX_SIZE: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Brute,
    #[serde(rename = "bb")]
    BranchAndBound,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Algorithm::Brute),
            "bb" => Ok(Algorithm::BranchAndBound),
            other => Err(invalid(format!("unknown algorithm {other:?}, expected brute or bb"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    TimeoutLowerBound,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::TimeoutLowerBound => "timeout-lower-bound",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub size: usize,
    pub witness: FiniteSet,
    pub nodes_explored: u64,
    pub status: SolveStatus,
}

/// Largest k-sum-free (or strongly k-sum-free) subset of `set`.
///
/// Brute mode returns the lexicographically smallest optimal witness; the
/// branch-and-bound witness is some optimal set.
pub fn max_k_sum_free(
    set: &FiniteSet,
    k: usize,
    algo: Algorithm,
    budget: Duration,
    strong: bool,
) -> Result<SolveResult> {
    check_k(k)?;
    if budget.is_zero() {
        return Err(invalid("time budget must be positive"));
    }
    let deadline = Instant::now() + budget;
    let (chosen, nodes, status) = match algo {
        Algorithm::Brute => {
            if set.len() > BRUTE_MAX_SIZE {
                return Err(invalid(format!(
                    "brute force needs |A| <= {BRUTE_MAX_SIZE}, got {}",
                    set.len()
                )));
            }
            let orders: Vec<usize> = if strong { (2..=k).collect() } else { vec![k] };
            let out = brute::solve(set, &orders, deadline);
            (out.chosen, out.nodes, out.status)
        }
        Algorithm::BranchAndBound => {
            let h = build_hypergraph(set, k, strong)?;
            let out = bb::solve(&h, deadline);
            (out.chosen, out.nodes, out.status)
        }
    };
    let witness = FiniteSet::new(chosen.iter().map(|&i| set.elements()[i].clone()).collect());
    Ok(SolveResult {
        size: witness.len(),
        witness,
        nodes_explored: nodes,
        status,
    })
}

/// Maximum k-sum-free density of a Følner grid, with the solver status.
pub fn max_fraction(grid: &FolnerGrid, k: usize, budget: Duration) -> Result<(Rational, SolveResult)> {
    let set = grid.generate()?;
    let result = max_k_sum_free(&set, k, Algorithm::BranchAndBound, budget, false)?;
    let fraction = Rational::new(BigInt::from(result.size), BigInt::from(grid.cardinality()));
    Ok((fraction, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nat::{rat, set_of};
    use crate::sumfree::{is_k_sum_free, is_strongly_k_sum_free};

    const T: Duration = Duration::from_secs(30);

    fn both(set: &FiniteSet, k: usize, strong: bool) -> (SolveResult, SolveResult) {
        (
            max_k_sum_free(set, k, Algorithm::Brute, T, strong).unwrap(),
            max_k_sum_free(set, k, Algorithm::BranchAndBound, T, strong).unwrap(),
        )
    }

    #[test]
    fn examples() {
        let (b, bb) = both(&set_of(&[1, 2, 3]), 2, false);
        assert_eq!((b.size, bb.size), (2, 2));
        assert_eq!(b.witness, set_of(&[1, 3]));
        let (b, bb) = both(&FiniteSet::range(1, 10), 2, false);
        assert_eq!((b.size, bb.size), (5, 5));
        let f2 = set_of(&[1, 2, 3, 6]);
        for k in [2, 3] {
            let (b, bb) = both(&f2, k, false);
            assert_eq!((b.size, bb.size), (2, 2));
            assert_eq!(b.status, SolveStatus::Optimal);
            assert_eq!(bb.status, SolveStatus::Optimal);
            assert!(is_k_sum_free(&bb.witness, k).unwrap());
        }
    }

    #[test]
    fn strong_mode() {
        let s = FiniteSet::range(1, 12);
        let (b, bb) = both(&s, 3, true);
        assert_eq!(b.size, bb.size);
        assert!(is_strongly_k_sum_free(&b.witness, 3).unwrap());
        assert!(is_strongly_k_sum_free(&bb.witness, 3).unwrap());
        let weak = max_k_sum_free(&s, 3, Algorithm::Brute, T, false).unwrap();
        assert!(weak.size >= b.size);
    }

    #[test]
    fn fractions() {
        let (f, r) = max_fraction(&FolnerGrid::diagonal(1).unwrap(), 2, T).unwrap();
        assert_eq!(f, rat(1, 1));
        assert_eq!(r.status, SolveStatus::Optimal);
        for k in [3, 5] {
            assert_eq!(max_fraction(&FolnerGrid::diagonal(1).unwrap(), k, T).unwrap().0, rat(1, 1));
        }
        assert_eq!(max_fraction(&FolnerGrid::diagonal(2).unwrap(), 2, T).unwrap().0, rat(1, 2));
    }

    #[test]
    fn errors() {
        let s = set_of(&[1, 2]);
        assert!(max_k_sum_free(&s, 1, Algorithm::Brute, T, false).is_err());
        assert!(max_k_sum_free(&s, 2, Algorithm::Brute, Duration::ZERO, false).is_err());
        assert!(max_k_sum_free(&FiniteSet::range(1, 31), 2, Algorithm::Brute, T, false).is_err());
        assert_eq!("bb".parse::<Algorithm>().unwrap(), Algorithm::BranchAndBound);
        assert!("ilp".parse::<Algorithm>().is_err());
    }

    #[test]
    fn timeout_reports_lower_bound() {
        let s = FiniteSet::range(1, 400);
        let r = max_k_sum_free(&s, 2, Algorithm::BranchAndBound, Duration::from_nanos(1), false).unwrap();
        assert!(is_k_sum_free(&r.witness, 2).unwrap());
        assert!(matches!(r.status, SolveStatus::TimeoutLowerBound | SolveStatus::Optimal));
    }
}
