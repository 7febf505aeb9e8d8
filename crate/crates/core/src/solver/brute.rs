//! Exhaustive oracle. Works directly from the sum-free predicate, without
//! the hypergraph, so it checks the branch-and-bound engine independently.

use std::time::Instant;

use num_bigint::BigUint;

use crate::nat::FiniteSet;
use crate::sumfree::{is_sum_of, Magnitude};

use super::SolveStatus as Status;

pub(super) struct BruteOutcome {
    pub chosen: Vec<usize>,
    pub nodes: u64,
    pub status: Status,
}

/// Include-first DFS over elements in increasing order. Sum-freeness is
/// hereditary, so abandoning a prefix that already has a violation loses
/// nothing; the first maximum found is the lexicographically smallest.
pub(super) fn solve(set: &FiniteSet, orders: &[usize], deadline: Instant) -> BruteOutcome {
    match set.to_u64s() {
        Some(v) => {
            let values: Vec<u128> = v.into_iter().map(u128::from).collect();
            run(&values, orders, deadline)
        }
        None => {
            let values: Vec<BigUint> = set.iter().map(|n| n.get().clone()).collect();
            run(&values, orders, deadline)
        }
    }
}

struct State<'a, T> {
    values: &'a [T],
    orders: &'a [usize],
    current: Vec<T>,
    current_idx: Vec<usize>,
    best: Vec<usize>,
    nodes: u64,
    deadline: Instant,
    timed_out: bool,
}

fn run<T: Magnitude>(values: &[T], orders: &[usize], deadline: Instant) -> BruteOutcome {
    let mut st = State {
        values,
        orders,
        current: Vec::new(),
        current_idx: Vec::new(),
        best: Vec::new(),
        nodes: 0,
        deadline,
        timed_out: false,
    };
    st.visit(0);
    BruteOutcome {
        chosen: st.best,
        nodes: st.nodes,
        status: if st.timed_out { Status::TimeoutLowerBound } else { Status::Optimal },
    }
}

impl<T: Magnitude> State<'_, T> {
    fn visit(&mut self, next: usize) {
        self.nodes += 1;
        if self.nodes % 4096 == 0 && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        if self.timed_out {
            return;
        }
        if self.current_idx.len() > self.best.len() {
            self.best = self.current_idx.clone();
        }
        if self.current_idx.len() + (self.values.len() - next) <= self.best.len() {
            return;
        }
        for i in next..self.values.len() {
            if self.current_idx.len() + (self.values.len() - i) <= self.best.len() {
                return;
            }
            let x = &self.values[i];
            // x is the new maximum, so only sums landing on x can appear
            let blocked = self.orders.iter().any(|&l| is_sum_of(&self.current, l, x));
            if !blocked {
                self.current.push(x.clone());
                self.current_idx.push(i);
                self.visit(i + 1);
                self.current.pop();
                self.current_idx.pop();
                if self.timed_out {
                    return;
                }
            }
        }
    }
}
