//! Spanning subgraphs of the n-blow-up of the cycle C_k.
//!
//! Parts are numbered `1..=k` and are arranged cyclically; vertex indices
//! inside a part are `0..n`. Edges only ever join consecutive parts, and the
//! adjacency between part `i` and part `i + 1` is kept as a dense bit matrix
//! in both directions so that row intersections are cheap from either side.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// A vertex of a blow-up graph: `part` is 1-based, `index` is 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexRef {
    pub part: usize,
    pub index: usize,
}

impl VertexRef {
    pub const fn new(part: usize, index: usize) -> Self {
        Self { part, index }
    }
}

impl fmt::Display for VertexRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V{}[{}]", self.part, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("a cycle blow-up needs k >= 3 parts, got k = {0}")]
    TooFewParts(usize),
    #[error("part size must be at least 1")]
    EmptyParts,
    #[error("part {part} is out of range 1..={k}")]
    PartOutOfRange { part: usize, k: usize },
    #[error("vertex index {index} is out of range 0..{n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("part {toward} is not adjacent to part {part} in C_{k}")]
    NotConsecutive {
        part: usize,
        toward: usize,
        k: usize,
    },
}

/// Cyclic part arithmetic. Every `+1`/`-1` on a part label goes through here.
#[inline]
pub fn wrap_part(k: usize, part: isize) -> usize {
    let k = k as isize;
    ((part - 1).rem_euclid(k) + 1) as usize
}

/// One bit set per part; used as the "alive vertices" view by every
/// algorithm that conceptually deletes vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexMask {
    parts: Vec<FixedBitSet>,
}

impl VertexMask {
    pub fn full(k: usize, n: usize) -> Self {
        let mut set = FixedBitSet::with_capacity(n);
        set.insert_range(..);
        Self {
            parts: vec![set; k],
        }
    }

    pub fn empty(k: usize, n: usize) -> Self {
        Self {
            parts: vec![FixedBitSet::with_capacity(n); k],
        }
    }

    pub fn from_vertices(
        k: usize,
        n: usize,
        vertices: impl IntoIterator<Item = VertexRef>,
    ) -> Self {
        let mut mask = Self::empty(k, n);
        for v in vertices {
            mask.insert(v);
        }
        mask
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn part(&self, part: usize) -> &FixedBitSet {
        &self.parts[part - 1]
    }

    pub fn part_mut(&mut self, part: usize) -> &mut FixedBitSet {
        &mut self.parts[part - 1]
    }

    pub fn contains(&self, v: VertexRef) -> bool {
        self.parts[v.part - 1].contains(v.index)
    }

    pub fn insert(&mut self, v: VertexRef) {
        self.parts[v.part - 1].insert(v.index);
    }

    pub fn remove(&mut self, v: VertexRef) {
        self.parts[v.part - 1].set(v.index, false);
    }

    pub fn count(&self, part: usize) -> usize {
        self.parts[part - 1].count_ones(..)
    }

    pub fn total(&self) -> usize {
        self.parts.iter().map(|p| p.count_ones(..)).sum()
    }

    /// Minimum number of members over all parts.
    pub fn min_count(&self) -> usize {
        self.parts
            .iter()
            .map(|p| p.count_ones(..))
            .min()
            .unwrap_or(0)
    }

    pub fn is_balanced(&self) -> bool {
        let first = self.count(1);
        (1..=self.k()).all(|p| self.count(p) == first)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexRef> + '_ {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(p, set)| set.ones().map(move |i| VertexRef::new(p + 1, i)))
    }

    pub fn union_with(&mut self, other: &VertexMask) {
        for (a, b) in self.parts.iter_mut().zip(&other.parts) {
            a.union_with(b);
        }
    }

    pub fn difference_with(&mut self, other: &VertexMask) {
        for (a, b) in self.parts.iter_mut().zip(&other.parts) {
            a.difference_with(b);
        }
    }
}

/// An immutable spanning subgraph of the n-blow-up of C_k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlowupGraph {
    k: usize,
    n: usize,
    /// `forward[i - 1][u]`: neighbours of `(i, u)` inside part `i + 1`.
    forward: Vec<Vec<FixedBitSet>>,
    /// `backward[i - 1][u]`: neighbours of `(i, u)` inside part `i - 1`.
    backward: Vec<Vec<FixedBitSet>>,
}

impl BlowupGraph {
    /// Builds a graph from `(i, u, w)` triples meaning `(i, u) ~ (i + 1, w)`.
    /// Duplicate triples collapse into a single edge.
    pub fn new(
        k: usize,
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self, GraphError> {
        if k < 3 {
            return Err(GraphError::TooFewParts(k));
        }
        if n == 0 {
            return Err(GraphError::EmptyParts);
        }
        let empty_rows = vec![vec![FixedBitSet::with_capacity(n); n]; k];
        let mut graph = Self {
            k,
            n,
            forward: empty_rows.clone(),
            backward: empty_rows,
        };
        for (part, u, w) in edges {
            if part == 0 || part > k {
                return Err(GraphError::PartOutOfRange { part, k });
            }
            for index in [u, w] {
                if index >= n {
                    return Err(GraphError::IndexOutOfRange { index, n });
                }
            }
            graph.set_edge(part, u, w);
        }
        Ok(graph)
    }

    /// Builds a graph from an adjacency predicate on each consecutive pair.
    pub fn from_fn(
        k: usize,
        n: usize,
        mut adjacent: impl FnMut(usize, usize, usize) -> bool,
    ) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        for part in 1..=k {
            for u in 0..n {
                for w in 0..n {
                    if adjacent(part, u, w) {
                        edges.push((part, u, w));
                    }
                }
            }
        }
        Self::new(k, n, edges)
    }

    fn set_edge(&mut self, part: usize, u: usize, w: usize) {
        let next = self.next(part);
        self.forward[part - 1][u].insert(w);
        self.backward[next - 1][w].insert(u);
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn next(&self, part: usize) -> usize {
        wrap_part(self.k, part as isize + 1)
    }

    pub fn prev(&self, part: usize) -> usize {
        wrap_part(self.k, part as isize - 1)
    }

    pub fn vertex_count(&self) -> usize {
        self.k * self.n
    }

    /// Global id used by the file formats: `(part - 1) * n + index`.
    pub fn global_id(&self, v: VertexRef) -> usize {
        (v.part - 1) * self.n + v.index
    }

    pub fn from_global_id(&self, id: usize) -> VertexRef {
        VertexRef::new(id / self.n + 1, id % self.n)
    }

    pub fn check_vertex(&self, v: VertexRef) -> Result<(), GraphError> {
        if v.part == 0 || v.part > self.k {
            return Err(GraphError::PartOutOfRange {
                part: v.part,
                k: self.k,
            });
        }
        if v.index >= self.n {
            return Err(GraphError::IndexOutOfRange {
                index: v.index,
                n: self.n,
            });
        }
        Ok(())
    }

    /// Neighbourhood of `v` inside the consecutive part `toward`.
    pub fn neighbors(&self, v: VertexRef, toward: usize) -> Result<&FixedBitSet, GraphError> {
        self.check_vertex(v)?;
        if toward == self.next(v.part) {
            Ok(&self.forward[v.part - 1][v.index])
        } else if toward == self.prev(v.part) {
            Ok(&self.backward[v.part - 1][v.index])
        } else {
            Err(GraphError::NotConsecutive {
                part: v.part,
                toward,
                k: self.k,
            })
        }
    }

    /// Neighbours of `(part, index)` in `part + 1`; unchecked hot-path accessor.
    #[inline]
    pub fn forward_row(&self, part: usize, index: usize) -> &FixedBitSet {
        &self.forward[part - 1][index]
    }

    /// Neighbours of `(part, index)` in `part - 1`; unchecked hot-path accessor.
    #[inline]
    pub fn backward_row(&self, part: usize, index: usize) -> &FixedBitSet {
        &self.backward[part - 1][index]
    }

    /// Adjacency test for two vertices in consecutive parts; false otherwise.
    pub fn adjacent(&self, a: VertexRef, b: VertexRef) -> bool {
        if b.part == self.next(a.part) {
            self.forward[a.part - 1][a.index].contains(b.index)
        } else if b.part == self.prev(a.part) {
            self.backward[a.part - 1][a.index].contains(b.index)
        } else {
            false
        }
    }

    pub fn degree(&self, v: VertexRef, toward: usize) -> Result<usize, GraphError> {
        Ok(self.neighbors(v, toward)?.count_ones(..))
    }

    /// `N(S, V_j)`: vertices of part `toward` adjacent to every member of `set`.
    /// The empty set has the whole part as its common neighbourhood.
    pub fn common_neighborhood(
        &self,
        set: &[VertexRef],
        toward: usize,
    ) -> Result<FixedBitSet, GraphError> {
        if toward == 0 || toward > self.k {
            return Err(GraphError::PartOutOfRange {
                part: toward,
                k: self.k,
            });
        }
        let mut common = FixedBitSet::with_capacity(self.n);
        common.insert_range(..);
        for &v in set {
            common.intersect_with(self.neighbors(v, toward)?);
        }
        Ok(common)
    }

    /// Minimum degree of the bipartite graph between `part` and `part + 1`.
    pub fn pair_min_degree(&self, part: usize) -> usize {
        let next = self.next(part);
        let left = self.forward[part - 1].iter().map(|row| row.count_ones(..));
        let right = self.backward[next - 1].iter().map(|row| row.count_ones(..));
        left.chain(right).min().unwrap_or(0)
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        let deltas: Vec<usize> = (1..=self.k).map(|i| self.pair_min_degree(i)).collect();
        let delta_star = deltas.iter().copied().min().unwrap_or(0);
        DegreeProfile { deltas, delta_star }
    }

    /// All edges as `(i, u, w)` triples in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for part in 1..=self.k {
            for u in 0..self.n {
                out.extend(self.forward[part - 1][u].ones().map(|w| (part, u, w)));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.forward
            .iter()
            .flatten()
            .map(|row| row.count_ones(..))
            .sum()
    }

    /// Renames the parts: old part `p` becomes new part `perm[p - 1]`.
    ///
    /// Only dihedral relabellings keep the cyclic structure; for `k = 3`
    /// every permutation qualifies.
    pub fn relabel_parts(&self, perm: &[usize]) -> Result<BlowupGraph, GraphError> {
        let k = self.k;
        let mut seen = vec![false; k];
        for &p in perm {
            if p == 0 || p > k || std::mem::replace(&mut seen[p - 1], true) {
                return Err(GraphError::PartOutOfRange { part: p, k });
            }
        }
        if perm.len() != k {
            return Err(GraphError::PartOutOfRange {
                part: perm.len(),
                k,
            });
        }
        let mut edges = Vec::with_capacity(self.edge_count());
        for (part, u, w) in self.edges() {
            let (a, b) = (perm[part - 1], perm[self.next(part) - 1]);
            if b == wrap_part(k, a as isize + 1) {
                edges.push((a, u, w));
            } else if a == wrap_part(k, b as isize + 1) {
                edges.push((b, w, u));
            } else {
                return Err(GraphError::NotConsecutive {
                    part: a,
                    toward: b,
                    k,
                });
            }
        }
        BlowupGraph::new(k, self.n, edges)
    }
}

/// Per-pair minimum degrees `deltas[i - 1] = δ(G[V_i, V_{i+1}])` and their minimum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub deltas: Vec<usize>,
    pub delta_star: usize,
}

/// A transversal copy of C_k: `members[p - 1]` is the index of the vertex in part `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransversalCycle {
    pub members: Vec<usize>,
}

impl TransversalCycle {
    pub fn new(members: Vec<usize>) -> Self {
        Self { members }
    }

    pub fn vertex(&self, part: usize) -> VertexRef {
        VertexRef::new(part, self.members[part - 1])
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexRef> + '_ {
        self.members
            .iter()
            .enumerate()
            .map(|(p, &i)| VertexRef::new(p + 1, i))
    }

    /// True if every cyclically consecutive pair of members is an edge of `g`.
    pub fn is_cycle_in(&self, g: &BlowupGraph) -> bool {
        self.members.len() == g.k()
            && (1..=g.k()).all(|p| {
                let q = g.next(p);
                self.members[p - 1] < g.n()
                    && g.forward_row(p, self.members[p - 1])
                        .contains(self.members[q - 1])
            })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tiling {
    pub cycles: Vec<TransversalCycle>,
}

impl Tiling {
    pub fn new(cycles: Vec<TransversalCycle>) -> Self {
        Self { cycles }
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn covered(&self, k: usize, n: usize) -> VertexMask {
        VertexMask::from_vertices(k, n, self.cycles.iter().flat_map(|c| c.vertices()))
    }

    /// Sorted by member tuple; gives tilings a canonical form for comparison.
    pub fn canonical(mut self) -> Self {
        self.cycles.sort();
        self
    }
}

/// First invariant a candidate tiling breaks.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TilingViolation {
    #[error("cycle {cycle} has {len} members, expected {k}")]
    WrongLength { cycle: usize, len: usize, k: usize },
    #[error("cycle {cycle} names out-of-range vertex {vertex}")]
    OutOfRange { cycle: usize, vertex: VertexRef },
    #[error("cycle {cycle} uses the non-edge {a} - {b}")]
    NonEdge {
        cycle: usize,
        a: VertexRef,
        b: VertexRef,
    },
    #[error("vertex {vertex} appears in cycles {first} and {second}")]
    Overlap {
        vertex: VertexRef,
        first: usize,
        second: usize,
    },
}

/// Checks that every cycle is a transversal C_k of `g` and that cycles are disjoint.
pub fn validate_tiling(g: &BlowupGraph, tiling: &Tiling) -> Result<(), TilingViolation> {
    let k = g.k();
    let mut owner: Vec<Vec<Option<usize>>> = vec![vec![None; g.n()]; k];
    for (ci, cycle) in tiling.cycles.iter().enumerate() {
        if cycle.members.len() != k {
            return Err(TilingViolation::WrongLength {
                cycle: ci,
                len: cycle.members.len(),
                k,
            });
        }
        for v in cycle.vertices() {
            if v.index >= g.n() {
                return Err(TilingViolation::OutOfRange {
                    cycle: ci,
                    vertex: v,
                });
            }
        }
        for p in 1..=k {
            let a = cycle.vertex(p);
            let b = cycle.vertex(g.next(p));
            if !g.adjacent(a, b) {
                return Err(TilingViolation::NonEdge { cycle: ci, a, b });
            }
        }
        for v in cycle.vertices() {
            let slot = &mut owner[v.part - 1][v.index];
            if let Some(first) = *slot {
                return Err(TilingViolation::Overlap {
                    vertex: v,
                    first,
                    second: ci,
                });
            }
            *slot = Some(ci);
        }
    }
    Ok(())
}

/// `U(T)` per part: indices not covered by any cycle of a valid tiling.
pub fn uncovered(g: &BlowupGraph, tiling: &Tiling) -> Result<Vec<Vec<usize>>, TilingViolation> {
    validate_tiling(g, tiling)?;
    let covered = tiling.covered(g.k(), g.n());
    Ok((1..=g.k())
        .map(|p| {
            (0..g.n())
                .filter(|&i| !covered.part(p).contains(i))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(k: usize, n: usize) -> BlowupGraph {
        BlowupGraph::from_fn(k, n, |_, _, _| true).unwrap()
    }

    #[test]
    fn wrap_part_is_cyclic() {
        assert_eq!(wrap_part(3, 0), 3);
        assert_eq!(wrap_part(3, 4), 1);
        assert_eq!(wrap_part(5, -1), 4);
        assert_eq!(wrap_part(4, 2), 2);
    }

    #[test]
    fn smallest_triangle() {
        let g = BlowupGraph::new(3, 1, [(1, 0, 0), (2, 0, 0), (3, 0, 0)]).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.degree_profile().delta_star, 1);
        let t = Tiling::new(vec![TransversalCycle::new(vec![0, 0, 0])]);
        assert!(validate_tiling(&g, &t).is_ok());
    }

    #[test]
    fn empty_and_complete_profiles() {
        let g = BlowupGraph::new(3, 2, []).unwrap();
        assert_eq!(g.degree_profile().deltas, vec![0, 0, 0]);
        let edges: Vec<_> = (1..=4)
            .flat_map(|i| (0..2).flat_map(move |u| (0..2).map(move |w| (i, u, w))))
            .collect();
        assert_eq!(edges.len(), 16);
        let g = BlowupGraph::new(4, 2, edges).unwrap();
        assert_eq!(g.degree_profile().delta_star, 2);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(BlowupGraph::new(2, 3, []), Err(GraphError::TooFewParts(2)));
        assert_eq!(BlowupGraph::new(3, 0, []), Err(GraphError::EmptyParts));
        assert!(matches!(
            BlowupGraph::new(3, 2, [(4, 0, 0)]),
            Err(GraphError::PartOutOfRange { part: 4, .. })
        ));
        assert!(matches!(
            BlowupGraph::new(3, 2, [(1, 0, 2)]),
            Err(GraphError::IndexOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = BlowupGraph::new(3, 2, [(1, 0, 1), (1, 0, 1), (2, 1, 1)]).unwrap();
        assert_eq!(g.edges(), vec![(1, 0, 1), (2, 1, 1)]);
    }

    #[test]
    fn degree_queries() {
        let g = complete(3, 4);
        let v = VertexRef::new(2, 3);
        assert_eq!(g.degree(v, 1).unwrap(), 4);
        assert_eq!(g.degree(v, 3).unwrap(), 4);
        let g = complete(5, 4);
        assert!(matches!(
            g.degree(VertexRef::new(1, 0), 3),
            Err(GraphError::NotConsecutive { .. })
        ));
    }

    #[test]
    fn backward_view_is_transpose() {
        let g = BlowupGraph::new(3, 3, [(1, 0, 2), (3, 1, 0)]).unwrap();
        assert!(g.neighbors(VertexRef::new(2, 2), 1).unwrap().contains(0));
        assert!(g.neighbors(VertexRef::new(1, 0), 3).unwrap().contains(1));
        assert!(!g.neighbors(VertexRef::new(1, 1), 3).unwrap().contains(0));
    }

    #[test]
    fn common_neighborhood_conventions() {
        let g = complete(3, 4);
        assert_eq!(g.common_neighborhood(&[], 2).unwrap().count_ones(..), 4);
        let s = [VertexRef::new(1, 0), VertexRef::new(3, 2)];
        assert_eq!(g.common_neighborhood(&s, 2).unwrap().count_ones(..), 4);
        let g = BlowupGraph::new(3, 3, [(1, 0, 0), (1, 0, 1), (1, 1, 1), (1, 1, 2)]).unwrap();
        let s = [VertexRef::new(1, 0), VertexRef::new(1, 1)];
        let common: Vec<_> = g.common_neighborhood(&s, 2).unwrap().ones().collect();
        assert_eq!(common, vec![1]);
        assert!(g.common_neighborhood(&[VertexRef::new(1, 0)], 1).is_err());
    }

    #[test]
    fn tiling_violations() {
        let g = complete(3, 3);
        let aligned = Tiling::new((0..3).map(|j| TransversalCycle::new(vec![j; 3])).collect());
        assert!(validate_tiling(&g, &aligned).is_ok());
        assert_eq!(aligned.len(), 3);

        let repeated = Tiling::new(vec![
            TransversalCycle::new(vec![0, 1, 2]),
            TransversalCycle::new(vec![1, 1, 0]),
        ]);
        assert!(matches!(
            validate_tiling(&g, &repeated),
            Err(TilingViolation::Overlap {
                first: 0,
                second: 1,
                ..
            })
        ));

        let sparse = BlowupGraph::new(3, 1, [(1, 0, 0), (2, 0, 0)]).unwrap();
        let t = Tiling::new(vec![TransversalCycle::new(vec![0, 0, 0])]);
        assert!(matches!(
            validate_tiling(&sparse, &t),
            Err(TilingViolation::NonEdge { .. })
        ));
    }

    #[test]
    fn uncovered_sets() {
        let g = complete(3, 3);
        let full = Tiling::new((0..3).map(|j| TransversalCycle::new(vec![j; 3])).collect());
        assert!(uncovered(&g, &full).unwrap().iter().all(Vec::is_empty));
        let none = uncovered(&g, &Tiling::default()).unwrap();
        assert!(none.iter().all(|p| p == &vec![0, 1, 2]));
    }

    #[test]
    fn relabel_reverses_orientation() {
        let g = BlowupGraph::new(3, 2, [(1, 0, 1)]).unwrap();
        // swap parts 1 and 2: old (1,0)~(2,1) becomes new (2,0)~(1,1), i.e. triple (1,1,0).
        let h = g.relabel_parts(&[2, 1, 3]).unwrap();
        assert_eq!(h.edges(), vec![(1, 1, 0)]);
        assert!(complete(4, 2).relabel_parts(&[1, 3, 2, 4]).is_err());
    }
}
