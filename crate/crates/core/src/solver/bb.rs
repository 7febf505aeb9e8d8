//! Branch and bound over the forbidden-sum hypergraph.

use std::time::Instant;

use super::hypergraph::ForbiddenHypergraph;
use super::SolveStatus;

pub(super) struct BbOutcome {
    pub chosen: Vec<usize>,
    pub nodes: u64,
    pub status: SolveStatus,
}

const FREE: u8 = 0;
const IN: u8 = 1;
const OUT: u8 = 2;

struct Search<'a> {
    edges: &'a [Vec<usize>],
    incidence: Vec<Vec<usize>>,
    state: Vec<u8>,
    chosen_count: Vec<u32>,
    dead_count: Vec<u32>,
    n_in: usize,
    n_free: usize,
    trail: Vec<usize>,
    best: Vec<usize>,
    nodes: u64,
    deadline: Instant,
    timed_out: bool,
    // scratch for the packing bound
    used: Vec<bool>,
    degree: Vec<u32>,
}

pub(super) fn solve(h: &ForbiddenHypergraph, deadline: Instant) -> BbOutcome {
    let n = h.vertices().len();
    let edges = h.edges();
    let mut incidence = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        for &v in e {
            incidence[v].push(i);
        }
    }
    let mut s = Search {
        edges,
        incidence,
        state: vec![FREE; n],
        chosen_count: vec![0; edges.len()],
        dead_count: vec![0; edges.len()],
        n_in: 0,
        n_free: n,
        trail: Vec::new(),
        best: Vec::new(),
        nodes: 0,
        deadline,
        timed_out: false,
        used: vec![false; n],
        degree: vec![0; n],
    };
    s.visit();
    BbOutcome {
        chosen: s.best,
        nodes: s.nodes,
        status: if s.timed_out { SolveStatus::TimeoutLowerBound } else { SolveStatus::Optimal },
    }
}

impl Search<'_> {
    fn live(&self, e: usize) -> bool {
        self.dead_count[e] == 0
    }

    /// Assigns `v` and propagates forced exclusions. Returns false on a
    /// conflict; the caller undoes via the trail either way.
    fn assign(&mut self, v: usize, value: u8) -> bool {
        let mut queue = vec![(v, value)];
        while let Some((v, value)) = queue.pop() {
            if self.state[v] != FREE {
                if self.state[v] != value {
                    return false;
                }
                continue;
            }
            self.state[v] = value;
            self.n_free -= 1;
            if value == IN {
                self.n_in += 1;
            }
            self.trail.push(v);
            for idx in 0..self.incidence[v].len() {
                let e = self.incidence[v][idx];
                if value == OUT {
                    self.dead_count[e] += 1;
                    continue;
                }
                self.chosen_count[e] += 1;
                if !self.live(e) {
                    continue;
                }
                let size = self.edges[e].len() as u32;
                if self.chosen_count[e] == size {
                    return false;
                }
                if self.chosen_count[e] + 1 == size {
                    if let Some(&u) = self.edges[e].iter().find(|&&u| self.state[u] == FREE) {
                        queue.push((u, OUT));
                    }
                }
            }
        }
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().expect("trail entry");
            let value = self.state[v];
            for &e in &self.incidence[v] {
                if value == IN {
                    self.chosen_count[e] -= 1;
                } else {
                    self.dead_count[e] -= 1;
                }
            }
            if value == IN {
                self.n_in -= 1;
            }
            self.n_free += 1;
            self.state[v] = FREE;
        }
    }

    /// Greedy packing of live edges with disjoint free parts; each needs a
    /// distinct excluded vertex. Also fills `degree` over live edges.
    fn packing_and_degrees(&mut self) -> usize {
        self.used.iter_mut().for_each(|u| *u = false);
        self.degree.iter_mut().for_each(|d| *d = 0);
        let mut packed = 0;
        for e in 0..self.edges.len() {
            if !self.live(e) {
                continue;
            }
            let edge = &self.edges[e];
            let mut disjoint = true;
            for &v in edge {
                if self.state[v] == FREE {
                    self.degree[v] += 1;
                    if self.used[v] {
                        disjoint = false;
                    }
                }
            }
            if disjoint {
                for &v in edge {
                    if self.state[v] == FREE {
                        self.used[v] = true;
                    }
                }
                packed += 1;
            }
        }
        packed
    }

    fn record_with_free(&mut self) {
        if self.n_in + self.n_free > self.best.len() {
            self.best = (0..self.state.len()).filter(|&v| self.state[v] != OUT).collect();
        }
    }

    fn visit(&mut self) {
        self.nodes += 1;
        if self.nodes % 1024 == 0 && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        if self.timed_out || self.n_in + self.n_free <= self.best.len() {
            return;
        }
        let packed = self.packing_and_degrees();
        if self.n_in + self.n_free - packed <= self.best.len() {
            return;
        }
        let pivot = (0..self.state.len())
            .filter(|&v| self.state[v] == FREE && self.degree[v] > 0)
            .max_by(|&a, &b| self.degree[a].cmp(&self.degree[b]).then(b.cmp(&a)));
        let Some(v) = pivot else {
            // no live edge touches a free vertex: take everything left
            self.record_with_free();
            return;
        };
        for value in [IN, OUT] {
            let mark = self.trail.len();
            if self.assign(v, value) {
                self.visit();
            }
            self.undo_to(mark);
            if self.timed_out {
                return;
            }
        }
    }
}
