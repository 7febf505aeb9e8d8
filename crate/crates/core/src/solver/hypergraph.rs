use num_bigint::BigUint;

use crate::error::{check_k, Error, Result};
use crate::nat::FiniteSet;

/// Default cap on the number of raw violating multisets enumerated.
pub const DEFAULT_EDGE_CAP: usize = 10_000_000;

/// Vertices are the elements of a set; each edge is the support of a
/// violating multiset `{a_1, ..., a_l, a_1 + ... + a_l}`. Independent sets are
/// exactly the sum-free subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForbiddenHypergraph {
    vertices: FiniteSet,
    /// Sorted vertex indices; minimal, deduplicated, sorted.
    edges: Vec<Vec<usize>>,
}

impl ForbiddenHypergraph {
    pub fn vertices(&self) -> &FiniteSet {
        &self.vertices
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// Edges as sets of elements.
    pub fn edge_sets(&self) -> Vec<FiniteSet> {
        self.edges
            .iter()
            .map(|e| FiniteSet::new(e.iter().map(|&i| self.vertices.elements()[i].clone()).collect()))
            .collect()
    }

    /// Whether the vertex subset given by indices contains no edge.
    pub fn is_independent(&self, chosen: &[bool]) -> bool {
        self.edges.iter().all(|e| !e.iter().all(|&v| chosen[v]))
    }
}

/// Edges for k-fold sums, or for every `l`-fold sum with `2 <= l <= k` when
/// `strong` is set.
pub fn build_hypergraph(set: &FiniteSet, k: usize, strong: bool) -> Result<ForbiddenHypergraph> {
    build_hypergraph_with_cap(set, k, strong, DEFAULT_EDGE_CAP)
}

pub fn build_hypergraph_with_cap(
    set: &FiniteSet,
    k: usize,
    strong: bool,
    cap: usize,
) -> Result<ForbiddenHypergraph> {
    check_k(k)?;
    let values: Vec<BigUint> = set.iter().map(|n| n.get().clone()).collect();
    let orders: Vec<usize> = if strong { (2..=k).collect() } else { vec![k] };
    let mut raw: Vec<Vec<usize>> = Vec::new();
    let mut tuple = Vec::with_capacity(k);
    for &l in &orders {
        enumerate(&values, l, 0, BigUint::default(), &mut tuple, &mut raw, cap)?;
    }
    Ok(ForbiddenHypergraph {
        vertices: set.clone(),
        edges: minimalize(raw, values.len()),
    })
}

fn enumerate(
    values: &[BigUint],
    left: usize,
    start: usize,
    partial: BigUint,
    tuple: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) -> Result<()> {
    let Some(max) = values.last() else {
        return Ok(());
    };
    if left == 0 {
        if let Ok(pos) = values.binary_search(&partial) {
            let mut edge = tuple.clone();
            edge.push(pos);
            edge.sort_unstable();
            edge.dedup();
            out.push(edge);
            if out.len() > cap {
                return Err(Error::ResourceLimit {
                    what: "hypergraph edges",
                    required: format!("more than {cap}"),
                    cap: cap.to_string(),
                });
            }
        }
        return Ok(());
    }
    for i in start..values.len() {
        let s = &partial + &values[i];
        if &s > max {
            break;
        }
        tuple.push(i);
        enumerate(values, left - 1, i, s, tuple, out, cap)?;
        tuple.pop();
    }
    Ok(())
}

/// Drops duplicates and every edge that contains another edge.
fn minimalize(mut edges: Vec<Vec<usize>>, n: usize) -> Vec<Vec<usize>> {
    edges.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    edges.dedup();
    let mut kept: Vec<Vec<usize>> = Vec::new();
    // kept edges indexed by their smallest vertex
    let mut by_min: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut mark = vec![false; n];
    for e in edges {
        for &v in &e {
            mark[v] = true;
        }
        let subsumed = e.iter().any(|&v| {
            by_min[v]
                .iter()
                .any(|&f| kept[f].iter().all(|&w| mark[w]))
        });
        for &v in &e {
            mark[v] = false;
        }
        if !subsumed {
            by_min[e[0]].push(kept.len());
            kept.push(e);
        }
    }
    kept.sort();
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nat::set_of;

    #[test]
    fn examples() {
        let h = build_hypergraph(&set_of(&[1, 2, 3]), 2, false).unwrap();
        assert_eq!(h.edge_sets(), vec![set_of(&[1, 2])]);
        let h = build_hypergraph(&set_of(&[2, 3]), 2, false).unwrap();
        assert!(h.edges().is_empty());
        let h = build_hypergraph(&set_of(&[1, 2, 6]), 3, false).unwrap();
        assert_eq!(h.edge_sets(), vec![set_of(&[2, 6])]);
    }

    #[test]
    fn strong_mode_unions_orders() {
        // 1+1=2 (l=2), 1+1+1=3 (l=3)
        let h = build_hypergraph(&set_of(&[1, 3]), 3, true).unwrap();
        assert_eq!(h.edge_sets(), vec![set_of(&[1, 3])]);
        let h = build_hypergraph(&set_of(&[1, 3]), 3, false).unwrap();
        assert_eq!(h.edge_sets(), vec![set_of(&[1, 3])]);
        let h = build_hypergraph(&set_of(&[1, 2, 3]), 3, true).unwrap();
        assert_eq!(h.edge_sets(), vec![set_of(&[1, 2]), set_of(&[1, 3])]);
    }

    #[test]
    fn edge_cap() {
        let s = FiniteSet::range(1, 40);
        assert!(matches!(
            build_hypergraph_with_cap(&s, 2, false, 10),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
