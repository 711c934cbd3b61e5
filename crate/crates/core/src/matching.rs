//! Bipartite matchings between consecutive parts.
//!
//! Everything runs on masked views of the graph (`left ⊆ V_i`,
//! `right ⊆ V_{i+1}`) and scans vertices in index order, so repeated calls
//! on the same input return the same matching.

use crate::graph::{BlowupGraph, GraphError};
use fixedbitset::FixedBitSet;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("Hall check needs |left| = |right|, got {left} and {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("edge ({0}, {1}) lies outside the {2} x {2} vertex range")]
    EdgeOutOfRange(usize, usize, usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

const FREE: usize = usize::MAX;

/// Hopcroft–Karp on an explicit adjacency list (left `0..adj.len()`,
/// right `0..right_len`). Neighbour lists are scanned in the order given.
#[derive(Debug, Clone)]
pub struct BipartiteMatcher<'a> {
    adj: &'a [Vec<usize>],
    right_len: usize,
    pub mate_left: Vec<usize>,
    pub mate_right: Vec<usize>,
}

impl<'a> BipartiteMatcher<'a> {
    pub fn new(adj: &'a [Vec<usize>], right_len: usize) -> Self {
        Self {
            adj,
            right_len,
            mate_left: vec![FREE; adj.len()],
            mate_right: vec![FREE; right_len],
        }
    }

    /// Runs phases until no augmenting path remains; returns the matching size.
    pub fn solve(&mut self) -> usize {
        let mut dist = vec![0usize; self.adj.len()];
        while self.bfs(&mut dist) {
            for u in 0..self.adj.len() {
                if self.mate_left[u] == FREE {
                    self.dfs(u, &mut dist);
                }
            }
        }
        self.size()
    }

    pub fn size(&self) -> usize {
        self.mate_left.iter().filter(|&&m| m != FREE).count()
    }

    fn bfs(&self, dist: &mut [usize]) -> bool {
        let mut queue = VecDeque::new();
        for u in 0..self.adj.len() {
            if self.mate_left[u] == FREE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = FREE;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                let next = self.mate_right[w];
                if next == FREE {
                    found = true;
                } else if dist[next] == FREE {
                    dist[next] = dist[u] + 1;
                    queue.push_back(next);
                }
            }
        }
        found
    }

    fn dfs(&mut self, u: usize, dist: &mut [usize]) -> bool {
        for idx in 0..self.adj[u].len() {
            let w = self.adj[u][idx];
            let next = self.mate_right[w];
            if next == FREE || (dist[next] == dist[u] + 1 && self.dfs(next, dist)) {
                self.mate_left[u] = w;
                self.mate_right[w] = u;
                return true;
            }
        }
        dist[u] = FREE;
        false
    }

    /// Left vertices reachable by alternating paths from unmatched left
    /// vertices. After `solve`, a nonempty result is a Hall violator:
    /// its neighbourhood is exactly the reachable right side, which is
    /// smaller by the number of unmatched left vertices.
    pub fn alternating_reach(&self) -> (Vec<usize>, Vec<usize>) {
        let mut seen_left = vec![false; self.adj.len()];
        let mut seen_right = vec![false; self.right_len];
        let mut queue: VecDeque<usize> = (0..self.adj.len())
            .filter(|&u| self.mate_left[u] == FREE)
            .inspect(|&u| seen_left[u] = true)
            .collect();
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if !seen_right[w] {
                    seen_right[w] = true;
                    let m = self.mate_right[w];
                    if m != FREE && !seen_left[m] {
                        seen_left[m] = true;
                        queue.push_back(m);
                    }
                }
            }
        }
        let left = (0..self.adj.len()).filter(|&u| seen_left[u]).collect();
        let right = (0..self.right_len).filter(|&w| seen_right[w]).collect();
        (left, right)
    }
}

/// Matched pairs `(u, w)` with `u ∈ V_i`, `w ∈ V_{i+1}`, sorted by `u`.
pub type Matching = Vec<(usize, usize)>;

struct MaskedPair {
    left_ids: Vec<usize>,
    right_ids: Vec<usize>,
    adj: Vec<Vec<usize>>,
}

fn masked_pair(
    g: &BlowupGraph,
    part: usize,
    left: &FixedBitSet,
    right: &FixedBitSet,
) -> MaskedPair {
    let left_ids: Vec<usize> = left.ones().filter(|&u| u < g.n()).collect();
    let right_ids: Vec<usize> = right.ones().filter(|&w| w < g.n()).collect();
    let mut local = vec![FREE; g.n()];
    for (j, &w) in right_ids.iter().enumerate() {
        local[w] = j;
    }
    let adj = left_ids
        .iter()
        .map(|&u| {
            g.forward_row(part, u)
                .ones()
                .filter_map(|w| (local[w] != FREE).then_some(local[w]))
                .collect()
        })
        .collect();
    MaskedPair {
        left_ids,
        right_ids,
        adj,
    }
}

fn check_part(g: &BlowupGraph, part: usize) -> Result<(), GraphError> {
    if part == 0 || part > g.k() {
        return Err(GraphError::PartOutOfRange { part, k: g.k() });
    }
    Ok(())
}

/// Maximum matching of `G[left, right]` where `left ⊆ V_part`, `right ⊆ V_{part+1}`.
pub fn max_matching(
    g: &BlowupGraph,
    part: usize,
    left: &FixedBitSet,
    right: &FixedBitSet,
) -> Result<Matching, MatchingError> {
    check_part(g, part)?;
    let view = masked_pair(g, part, left, right);
    let mut matcher = BipartiteMatcher::new(&view.adj, view.right_ids.len());
    matcher.solve();
    Ok(matcher
        .mate_left
        .iter()
        .enumerate()
        .filter(|(_, &m)| m != FREE)
        .map(|(u, &m)| (view.left_ids[u], view.right_ids[m]))
        .collect())
}

/// `None` iff `G[left, right]` has a perfect matching; otherwise a set
/// `S ⊆ left` with `|N(S) ∩ right| < |S|`.
pub fn hall_violator(
    g: &BlowupGraph,
    part: usize,
    left: &FixedBitSet,
    right: &FixedBitSet,
) -> Result<Option<Vec<usize>>, MatchingError> {
    check_part(g, part)?;
    let view = masked_pair(g, part, left, right);
    if view.left_ids.len() != view.right_ids.len() {
        return Err(MatchingError::SizeMismatch {
            left: view.left_ids.len(),
            right: view.right_ids.len(),
        });
    }
    let mut matcher = BipartiteMatcher::new(&view.adj, view.right_ids.len());
    if matcher.solve() == view.left_ids.len() {
        return Ok(None);
    }
    let (reach, _) = matcher.alternating_reach();
    Ok(Some(reach.into_iter().map(|u| view.left_ids[u]).collect()))
}

/// Perfect matching of the whole pair `(V_part, V_{part+1})`, as `mate[u] = w`.
pub fn perfect_matching(g: &BlowupGraph, part: usize) -> Result<Option<Vec<usize>>, MatchingError> {
    let mut all = FixedBitSet::with_capacity(g.n());
    all.insert_range(..);
    let m = max_matching(g, part, &all, &all)?;
    if m.len() < g.n() {
        return Ok(None);
    }
    Ok(Some(m.into_iter().map(|(_, w)| w).collect()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimultaneousFailure {
    pub matched: usize,
    /// Left vertices whose common neighbourhood in `E(H) ∩ E(H')` is too small.
    pub violator: Vec<usize>,
}

/// A perfect matching inside `E(H) ∩ E(H')` for two bipartite graphs on
/// the same pair of `n`-sets, returned as `mate[u] = w`.
///
/// The intersection has minimum degree at least `δ(H) + δ(H') - n`, so a
/// matching is guaranteed once that reaches `n/2`; otherwise the search still
/// runs and failure comes with a Hall violator.
pub fn simultaneous_matching(
    h: &[(usize, usize)],
    h_prime: &[(usize, usize)],
    n: usize,
) -> Result<Result<Vec<usize>, SimultaneousFailure>, MatchingError> {
    let mut in_h = vec![FixedBitSet::with_capacity(n); n];
    for &(u, w) in h {
        if u >= n || w >= n {
            return Err(MatchingError::EdgeOutOfRange(u, w, n));
        }
        in_h[u].insert(w);
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, w) in h_prime {
        if u >= n || w >= n {
            return Err(MatchingError::EdgeOutOfRange(u, w, n));
        }
        if in_h[u].contains(w) {
            adj[u].push(w);
        }
    }
    for row in &mut adj {
        row.sort_unstable();
        row.dedup();
    }
    let mut matcher = BipartiteMatcher::new(&adj, n);
    let size = matcher.solve();
    if size == n {
        Ok(Ok(matcher.mate_left))
    } else {
        let (violator, _) = matcher.alternating_reach();
        Ok(Err(SimultaneousFailure {
            matched: size,
            violator,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(n: usize) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(n);
        s.insert_range(..);
        s
    }

    #[test]
    fn complete_pair_is_perfect() {
        let g = BlowupGraph::from_fn(3, 5, |_, _, _| true).unwrap();
        let m = max_matching(&g, 1, &full(5), &full(5)).unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(hall_violator(&g, 1, &full(5), &full(5)).unwrap(), None);
    }

    #[test]
    fn empty_pair_matches_nothing() {
        let g = BlowupGraph::new(3, 4, []).unwrap();
        assert!(max_matching(&g, 2, &full(4), &full(4)).unwrap().is_empty());
    }

    #[test]
    fn isolated_left_vertex_is_the_violator() {
        // vertex 2 of V_1 has no neighbours in V_2
        let g = BlowupGraph::from_fn(3, 3, |p, u, _| p != 1 || u != 2).unwrap();
        assert_eq!(
            hall_violator(&g, 1, &full(3), &full(3)).unwrap(),
            Some(vec![2])
        );
    }

    #[test]
    fn masked_subsets_only() {
        let g = BlowupGraph::from_fn(3, 4, |_, u, w| u == w).unwrap();
        let mut left = FixedBitSet::with_capacity(4);
        left.insert(1);
        left.insert(2);
        let mut right = FixedBitSet::with_capacity(4);
        right.insert(2);
        right.insert(3);
        assert_eq!(max_matching(&g, 1, &left, &right).unwrap(), vec![(2, 2)]);
        assert_eq!(hall_violator(&g, 1, &left, &right).unwrap(), Some(vec![1]));
        right.insert(0);
        assert!(matches!(
            hall_violator(&g, 1, &left, &right),
            Err(MatchingError::SizeMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn simultaneous_on_complete() {
        let all: Vec<_> = (0..4).flat_map(|u| (0..4).map(move |w| (u, w))).collect();
        let mate = simultaneous_matching(&all, &all, 4).unwrap().unwrap();
        let mut seen = mate.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3]);
    }

    #[test]
    fn simultaneous_disjoint_edges_fail() {
        let h: Vec<_> = (0..3).map(|u| (u, u)).collect();
        let h2: Vec<_> = (0..3).map(|u| (u, (u + 1) % 3)).collect();
        let fail = simultaneous_matching(&h, &h2, 3).unwrap().unwrap_err();
        assert_eq!(fail.matched, 0);
        assert_eq!(fail.violator, vec![0, 1, 2]);
        assert!(simultaneous_matching(&h, &[(5, 0)], 3).is_err());
    }
}
