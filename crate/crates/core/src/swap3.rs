//! Triangle-tiling augmentation for `k = 3`.
//!
//! The search repeatedly grows a tiling by local moves until it covers all
//! but at most one vertex per part:
//!
//! * add an uncovered triangle;
//! * split: replace a triangle `T` by `ex`, `fy` where `e`, `f` are disjoint
//!   uncovered edges in different part pairs and `x`, `y ∈ T`;
//! * rotate: swap `a_i x_i y_i` for `a x_i y_i`, freeing the edge `a_i x`;
//! * two exchange steps that leave an uncovered `B`–`C` edge behind.
//!
//! Same-size moves strictly increase the potential
//! `(uncovered B–C edge exists, size of the best dissimilar matching)`,
//! so the run is finite; the move cap turns anything unexpected into a
//! reported counterexample.

use crate::graph::{
    uncovered, validate_tiling, BlowupGraph, Tiling, TilingViolation, TransversalCycle, VertexRef,
};
use crate::io::GraphFile;
use num_rational::Rational64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Swap3Error {
    #[error("triangle augmentation needs k = 3, got k = {0}")]
    NotTriangle(usize),
    #[error("degree condition fails: deltas {deltas:?} need each 2δ_i >= n = {n} and sum >= 2n")]
    Degrees { deltas: Vec<usize>, n: usize },
    #[error(transparent)]
    Invalid(#[from] TilingViolation),
    #[error("no move applies at size {size} although the degree condition holds")]
    Stuck {
        size: usize,
        artifact: Box<Counterexample>,
    },
    #[error("move cap reached at size {size}")]
    CapReached {
        size: usize,
        artifact: Box<Counterexample>,
    },
}

impl Swap3Error {
    pub fn artifact(&self) -> Option<&Counterexample> {
        match self {
            Swap3Error::Stuck { artifact, .. } | Swap3Error::CapReached { artifact, .. } => {
                Some(artifact)
            }
            _ => None,
        }
    }
}

/// Everything needed to replay a failed run.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub graph: GraphFile,
    pub tiling: Tiling,
    pub trace: Vec<Move>,
}

impl Counterexample {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("counterexample serializes")
    }
}

/// Part labelling with `δ(A,B) >= δ(A,C) >= δ(B,C)`; the fractions are the
/// normalised minimum degrees `γ`, `β`, `α` of those pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AbcLabels {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub alpha: Rational64,
    pub beta: Rational64,
    pub gamma: Rational64,
}

/// Minimum degree between two distinct parts of a triangle blow-up.
fn pair_delta(g: &BlowupGraph, p: usize, q: usize) -> usize {
    if q == g.next(p) {
        g.pair_min_degree(p)
    } else {
        g.pair_min_degree(q)
    }
}

/// Picks the labelling; ties go to the lexicographically smallest `(a, b, c)`,
/// so equal degrees give the identity.
pub fn relabel_abc(g: &BlowupGraph) -> Result<AbcLabels, Swap3Error> {
    if g.k() != 3 {
        return Err(Swap3Error::NotTriangle(g.k()));
    }
    const ORDERS: [[usize; 3]; 6] = [
        [1, 2, 3],
        [1, 3, 2],
        [2, 1, 3],
        [2, 3, 1],
        [3, 1, 2],
        [3, 2, 1],
    ];
    let n = g.n() as i64;
    let [a, b, c] = ORDERS
        .into_iter()
        .find(|&[a, b, c]| {
            let (ab, ac, bc) = (
                pair_delta(g, a, b),
                pair_delta(g, a, c),
                pair_delta(g, b, c),
            );
            ab >= ac && ac >= bc
        })
        .expect("sorting three values always succeeds");
    let frac = |p, q| Rational64::new(pair_delta(g, p, q) as i64, n);
    Ok(AbcLabels {
        a,
        b,
        c,
        alpha: frac(b, c),
        beta: frac(a, c),
        gamma: frac(a, b),
    })
}

/// Which of the three part pairs an edge lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum PairRole {
    AB,
    AC,
    BC,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoleEdge {
    pub pair: PairRole,
    pub u: VertexRef,
    pub w: VertexRef,
}

impl RoleEdge {
    fn touches(&self, v: VertexRef) -> bool {
        self.u == v || self.w == v
    }

    fn disjoint(&self, other: &RoleEdge) -> bool {
        !self.touches(other.u) && !self.touches(other.w)
    }
}

/// A dissimilar matching of uncovered edges together with its size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DissimilarMatching {
    pub edges: Vec<RoleEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MoveKind {
    AddTriangle,
    Split,
    Rotate,
    ExchangeOne,
    ExchangeTwo,
    ExchangeMerge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Move {
    pub kind: MoveKind,
    pub removed: Vec<TransversalCycle>,
    pub added: Vec<TransversalCycle>,
    pub size_after: usize,
}

/// A candidate change to the tiling: drop the listed cycles, add the new ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replacement {
    pub kind: MoveKind,
    pub removed: Vec<usize>,
    pub added: Vec<TransversalCycle>,
}

impl Replacement {
    pub fn apply(&self, tiling: &Tiling) -> Tiling {
        let mut cycles: Vec<TransversalCycle> = tiling
            .cycles
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.removed.contains(i))
            .map(|(_, c)| c.clone())
            .collect();
        cycles.extend(self.added.iter().cloned());
        Tiling::new(cycles)
    }
}

/// Working view of a tiling in `A`/`B`/`C` roles.
struct State<'g> {
    g: &'g BlowupGraph,
    labels: AbcLabels,
    tiling: Tiling,
    /// `free[p - 1][i]`: vertex `(p, i)` is uncovered
    free: Vec<Vec<bool>>,
}

impl<'g> State<'g> {
    fn new(g: &'g BlowupGraph, labels: AbcLabels, tiling: Tiling) -> Result<Self, TilingViolation> {
        let open = uncovered(g, &tiling)?;
        let mut free = vec![vec![false; g.n()]; 3];
        for (p, idx) in open.iter().enumerate() {
            for &i in idx {
                free[p][i] = true;
            }
        }
        Ok(Self {
            g,
            labels,
            tiling,
            free,
        })
    }

    fn parts_of(&self, pair: PairRole) -> (usize, usize) {
        let l = &self.labels;
        match pair {
            PairRole::AB => (l.a, l.b),
            PairRole::AC => (l.a, l.c),
            PairRole::BC => (l.b, l.c),
        }
    }

    fn third(&self, pair: PairRole) -> usize {
        let l = &self.labels;
        match pair {
            PairRole::AB => l.c,
            PairRole::AC => l.b,
            PairRole::BC => l.a,
        }
    }

    fn free_in(&self, part: usize) -> impl Iterator<Item = VertexRef> + '_ {
        (0..self.g.n())
            .filter(move |&i| self.free[part - 1][i])
            .map(move |i| VertexRef::new(part, i))
    }

    fn adj(&self, x: VertexRef, y: VertexRef) -> bool {
        self.g.adjacent(x, y)
    }

    fn triangle(&self, vs: [VertexRef; 3]) -> TransversalCycle {
        let mut members = vec![0; 3];
        for v in vs {
            members[v.part - 1] = v.index;
        }
        TransversalCycle::new(members)
    }

    fn uncovered_edges(&self, pair: PairRole) -> Vec<RoleEdge> {
        let (p, q) = self.parts_of(pair);
        let mut out = Vec::new();
        for u in self.free_in(p) {
            for w in self.free_in(q) {
                if self.adj(u, w) {
                    out.push(RoleEdge { pair, u, w });
                }
            }
        }
        out
    }

    /// Largest dissimilar matching of uncovered edges; with `need_bc`, only
    /// matchings containing a `B`–`C` edge count. Returns every optimal one
    /// (up to `limit`) in scan order.
    fn best_matchings(&self, need_bc: bool, limit: usize) -> Vec<DissimilarMatching> {
        let lists = [
            self.uncovered_edges(PairRole::AB),
            self.uncovered_edges(PairRole::AC),
            self.uncovered_edges(PairRole::BC),
        ];
        for size in (0..=3usize).rev() {
            let mut found = Vec::new();
            for mask in 0u8..8 {
                if mask.count_ones() as usize != size || (need_bc && mask & 4 == 0) {
                    continue;
                }
                let chosen: Vec<&Vec<RoleEdge>> = (0..3)
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| &lists[b])
                    .collect();
                collect_matchings(&chosen, &mut Vec::new(), &mut found, limit);
                if found.len() >= limit {
                    break;
                }
            }
            if !found.is_empty() {
                return found;
            }
            if size == 0 {
                return vec![DissimilarMatching { edges: Vec::new() }];
            }
        }
        unreachable!()
    }

    fn has_uncovered_bc(&self) -> bool {
        !self.uncovered_edges(PairRole::BC).is_empty()
    }

    /// `(uncovered B–C edge exists, best matching size under that preference)`.
    fn potential(&self) -> (bool, usize) {
        let bc = self.has_uncovered_bc();
        (bc, self.best_matchings(bc, 1)[0].edges.len())
    }

    /// The vertex of the third part completing `e` into a triangle with `T`'s member, if any.
    fn completes(&self, e: &RoleEdge, t: &TransversalCycle) -> Option<VertexRef> {
        let x = t.vertex(self.third(e.pair));
        (self.adj(e.u, x) && self.adj(e.w, x)).then_some(x)
    }

    fn add_triangle(&self) -> Option<Replacement> {
        for u in self.free_in(1) {
            for v in self.free_in(2) {
                if !self.adj(u, v) {
                    continue;
                }
                for w in self.free_in(3) {
                    if self.adj(v, w) && self.adj(w, u) {
                        return Some(Replacement {
                            kind: MoveKind::AddTriangle,
                            removed: vec![],
                            added: vec![self.triangle([u, v, w])],
                        });
                    }
                }
            }
        }
        None
    }

    fn split(&self) -> Option<Replacement> {
        let pairs = [PairRole::AB, PairRole::AC, PairRole::BC];
        let lists: Vec<Vec<RoleEdge>> = pairs.iter().map(|&p| self.uncovered_edges(p)).collect();
        for (ti, t) in self.tiling.cycles.iter().enumerate() {
            let hits: Vec<Vec<(RoleEdge, VertexRef)>> = lists
                .iter()
                .map(|l| {
                    l.iter()
                        .filter_map(|e| self.completes(e, t).map(|x| (*e, x)))
                        .collect()
                })
                .collect();
            for i in 0..3 {
                for j in i + 1..3 {
                    for (e, x) in &hits[i] {
                        for (f, y) in &hits[j] {
                            if e.disjoint(f) {
                                return Some(Replacement {
                                    kind: MoveKind::Split,
                                    removed: vec![ti],
                                    added: vec![
                                        self.triangle([e.u, e.w, *x]),
                                        self.triangle([f.u, f.w, *y]),
                                    ],
                                });
                            }
                        }
                    }
                }
            }
        }
        None
    }

    fn rotate(&self) -> Option<Replacement> {
        let before = self.potential();
        let l = self.labels;
        for f in self.best_matchings(before.0, 256) {
            for x_part in [l.b, l.c] {
                let forbidden = if x_part == l.b {
                    PairRole::AB
                } else {
                    PairRole::AC
                };
                if f.edges.iter().any(|e| e.pair == forbidden) {
                    continue;
                }
                let y_part = if x_part == l.b { l.c } else { l.b };
                let in_w = |v: VertexRef| f.edges.iter().any(|e| e.touches(v));
                for a in self.free_in(l.a).filter(|&v| !in_w(v)) {
                    for x in self.free_in(x_part).filter(|&v| !in_w(v)) {
                        if self.adj(a, x) {
                            continue;
                        }
                        for (ti, t) in self.tiling.cycles.iter().enumerate() {
                            let (ai, xi, yi) = (t.vertex(l.a), t.vertex(x_part), t.vertex(y_part));
                            if self.adj(ai, x) && self.adj(a, xi) && self.adj(a, yi) {
                                let rep = Replacement {
                                    kind: MoveKind::Rotate,
                                    removed: vec![ti],
                                    added: vec![self.triangle([a, xi, yi])],
                                };
                                let next = State::new(self.g, l, rep.apply(&self.tiling)).ok()?;
                                if next.potential() > before {
                                    return Some(rep);
                                }
                            }
                        }
                    }
                }
            }
        }
        None
    }

    /// The exchange steps used once no `B`–`C` edge is uncovered and the best
    /// dissimilar matching is `{ab, a'c}`.
    fn exchange(&self) -> Option<Replacement> {
        let l = self.labels;
        for f in self.best_matchings(false, 256) {
            let ab = *f.edges.iter().find(|e| e.pair == PairRole::AB)?;
            let ac = *f.edges.iter().find(|e| e.pair == PairRole::AC)?;
            let b_taken = if ab.u.part == l.b { ab.u } else { ab.w };
            let c_taken = if ac.u.part == l.c { ac.u } else { ac.w };
            for b2 in self.free_in(l.b).filter(|&v| v != b_taken) {
                for c2 in self.free_in(l.c).filter(|&v| v != c_taken) {
                    for (ti, t) in self.tiling.cycles.iter().enumerate() {
                        let (tb, tc) = (t.vertex(l.b), t.vertex(l.c));
                        if !(self.adj(b2, tc) && self.adj(c2, tb)) {
                            continue;
                        }
                        let e = RoleEdge {
                            pair: PairRole::BC,
                            u: tb,
                            w: c2,
                        };
                        if let Some(a2) = self
                            .free_in(l.a)
                            .find(|&a2| self.adj(a2, tb) && self.adj(a2, c2))
                        {
                            return Some(Replacement {
                                kind: MoveKind::ExchangeOne,
                                removed: vec![ti],
                                added: vec![self.triangle([a2, tb, c2])],
                            });
                        }
                        for (tj, t2) in self.tiling.cycles.iter().enumerate() {
                            let Some(x) = self.completes(&e, t2) else {
                                continue;
                            };
                            for g in [ab, ac] {
                                let Some(y) = self.completes(&g, t2) else {
                                    continue;
                                };
                                // inside the same triangle the two completions can collide
                                if g.touches(tb) || y == tb || y == x {
                                    continue;
                                }
                                let added =
                                    vec![self.triangle([x, tb, c2]), self.triangle([g.u, g.w, y])];
                                let (kind, removed) = if ti == tj {
                                    (MoveKind::ExchangeMerge, vec![ti])
                                } else {
                                    (MoveKind::ExchangeTwo, vec![ti, tj])
                                };
                                return Some(Replacement {
                                    kind,
                                    removed,
                                    added,
                                });
                            }
                        }
                    }
                }
            }
        }
        None
    }
}

fn collect_matchings(
    lists: &[&Vec<RoleEdge>],
    current: &mut Vec<RoleEdge>,
    out: &mut Vec<DissimilarMatching>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    let Some((first, rest)) = lists.split_first() else {
        out.push(DissimilarMatching {
            edges: current.clone(),
        });
        return;
    };
    for e in first.iter() {
        if current.iter().all(|f| f.disjoint(e)) {
            current.push(*e);
            collect_matchings(rest, current, out, limit);
            current.pop();
            if out.len() >= limit {
                return;
            }
        }
    }
}

/// First size-increasing move: an uncovered triangle, else a split.
pub fn find_improvement(
    g: &BlowupGraph,
    tiling: &Tiling,
) -> Result<Option<Replacement>, Swap3Error> {
    let state = State::new(g, relabel_abc(g)?, tiling.clone())?;
    Ok(state.add_triangle().or_else(|| state.split()))
}

/// A same-size rotation that strictly increases the potential.
pub fn rotate(g: &BlowupGraph, tiling: &Tiling) -> Result<Option<Replacement>, Swap3Error> {
    let state = State::new(g, relabel_abc(g)?, tiling.clone())?;
    Ok(state.rotate())
}

/// The exchange step, applicable when no `B`–`C` edge is uncovered and the
/// best dissimilar matching has two edges. It either grows the tiling or
/// leaves an uncovered `B`–`C` edge behind.
pub fn exchange(g: &BlowupGraph, tiling: &Tiling) -> Result<Option<Replacement>, Swap3Error> {
    let state = State::new(g, relabel_abc(g)?, tiling.clone())?;
    if state.potential() != (false, 2) {
        return Ok(None);
    }
    Ok(state.exchange())
}

/// Maximum dissimilar matching among uncovered edges (`h` of the tiling).
pub fn dissimilar_h(g: &BlowupGraph, tiling: &Tiling) -> Result<DissimilarMatching, Swap3Error> {
    let state = State::new(g, relabel_abc(g)?, tiling.clone())?;
    Ok(state.best_matchings(false, 1).swap_remove(0))
}

/// Potential of a tiling; same-size moves strictly increase it.
pub fn potential(g: &BlowupGraph, tiling: &Tiling) -> Result<(bool, usize), Swap3Error> {
    let state = State::new(g, relabel_abc(g)?, tiling.clone())?;
    Ok(state.potential())
}

#[derive(Debug, Clone, Serialize)]
pub struct Swap3Outcome {
    pub tiling: Tiling,
    pub labels: AbcLabels,
    pub trace: Vec<Move>,
}

/// `2δ_i >= n` for every pair and `δ_1 + δ_2 + δ_3 >= 2n`.
pub fn check_degree_condition(g: &BlowupGraph) -> Result<(), Swap3Error> {
    if g.k() != 3 {
        return Err(Swap3Error::NotTriangle(g.k()));
    }
    let deltas = g.degree_profile().deltas;
    let n = g.n();
    if deltas.iter().any(|&d| 2 * d < n) || deltas.iter().sum::<usize>() < 2 * n {
        return Err(Swap3Error::Degrees { deltas, n });
    }
    Ok(())
}

/// Grows a tiling from empty until it has at least `n - 1` triangles.
pub fn near_factor3(g: &BlowupGraph, cap: usize) -> Result<Swap3Outcome, Swap3Error> {
    near_factor3_from(g, Tiling::default(), cap)
}

pub fn near_factor3_from(
    g: &BlowupGraph,
    start: Tiling,
    cap: usize,
) -> Result<Swap3Outcome, Swap3Error> {
    check_degree_condition(g)?;
    validate_tiling(g, &start)?;
    let labels = relabel_abc(g)?;
    let mut tiling = start;
    let mut trace: Vec<Move> = Vec::new();
    let artifact = |tiling: &Tiling, trace: &Vec<Move>| {
        Box::new(Counterexample {
            graph: GraphFile::from(g),
            tiling: tiling.clone(),
            trace: trace.clone(),
        })
    };
    while tiling.len() + 1 < g.n() {
        if trace.len() >= cap {
            return Err(Swap3Error::CapReached {
                size: tiling.len(),
                artifact: artifact(&tiling, &trace),
            });
        }
        let state = State::new(g, labels, tiling.clone())?;
        let step = state
            .add_triangle()
            .or_else(|| state.split())
            .or_else(|| {
                if state.potential() == (false, 2) {
                    state.exchange()
                } else {
                    None
                }
            })
            .or_else(|| state.rotate());
        let Some(rep) = step else {
            return Err(Swap3Error::Stuck {
                size: tiling.len(),
                artifact: artifact(&tiling, &trace),
            });
        };
        let next = rep.apply(&tiling);
        validate_tiling(g, &next)?;
        trace.push(Move {
            kind: rep.kind,
            removed: rep
                .removed
                .iter()
                .map(|&i| tiling.cycles[i].clone())
                .collect(),
            added: rep.added.clone(),
            size_after: next.len(),
        });
        tiling = next;
    }
    Ok(Swap3Outcome {
        tiling,
        labels,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete_blowup, haggkvist_example, random_min_degree};

    #[test]
    fn labelling_examples() {
        let g = random_min_degree(3, 9, &[5, 7, 6], 0).unwrap();
        let prof = g.degree_profile();
        let l = relabel_abc(&g).unwrap();
        let d = |p, q| pair_delta(&g, p, q);
        assert!(d(l.a, l.b) >= d(l.a, l.c) && d(l.a, l.c) >= d(l.b, l.c));
        if prof.deltas == vec![5, 7, 6] {
            assert_eq!((l.a, l.b, l.c), (3, 2, 1));
            assert_eq!(l.gamma, Rational64::new(7, 9));
        }
        let l = relabel_abc(&complete_blowup(3, 4).unwrap()).unwrap();
        assert_eq!((l.a, l.b, l.c), (1, 2, 3));
        assert!(relabel_abc(&complete_blowup(4, 2).unwrap()).is_err());
    }

    #[test]
    fn gamma_pair_is_the_dense_one() {
        // pairs (1,2) and (2,3) have δ = 4, pair (3,1) has δ = 8
        let g = BlowupGraph::from_fn(3, 8, |p, u, w| p == 3 || (u + w) % 2 == 0).unwrap();
        assert_eq!(g.degree_profile().deltas, vec![4, 4, 8]);
        let l = relabel_abc(&g).unwrap();
        assert_eq!(pair_delta(&g, l.a, l.b), 8);
        assert_eq!((l.a, l.b, l.c), (1, 3, 2));
    }

    #[test]
    fn uncovered_triangle_is_added() {
        let g = complete_blowup(3, 2).unwrap();
        let rep = find_improvement(&g, &Tiling::default()).unwrap().unwrap();
        assert_eq!(rep.kind, MoveKind::AddTriangle);
        assert_eq!(rep.added, vec![TransversalCycle::new(vec![0, 0, 0])]);
    }

    #[test]
    fn split_gadget() {
        // T0 = (0,0,0); e = (1,1)-(2,1) in pair (1,2), f = (2,2)-(3,2) in pair (2,3)
        let edges = [
            (1, 0, 0),
            (2, 0, 0),
            (3, 0, 0),
            (1, 1, 1), // e
            (2, 1, 0), // e sees (3,0)
            (3, 0, 1),
            (2, 2, 2), // f
            (3, 2, 0), // f sees (1,0)
            (1, 0, 2),
        ];
        let g = BlowupGraph::new(3, 3, edges).unwrap();
        let t = Tiling::new(vec![TransversalCycle::new(vec![0, 0, 0])]);
        let rep = find_improvement(&g, &t).unwrap().unwrap();
        assert_eq!(rep.kind, MoveKind::Split);
        let next = rep.apply(&t);
        assert!(validate_tiling(&g, &next).is_ok());
        assert_eq!(next.len(), 2);
    }

    #[test]
    fn factor_has_no_improvement_and_h_zero() {
        let g = complete_blowup(3, 3).unwrap();
        let t = Tiling::new((0..3).map(|i| TransversalCycle::new(vec![i; 3])).collect());
        assert!(find_improvement(&g, &t).unwrap().is_none());
        assert!(dissimilar_h(&g, &t).unwrap().edges.is_empty());
    }

    #[test]
    fn h_counts_disjoint_dissimilar_edges() {
        let g = BlowupGraph::new(3, 2, [(1, 0, 0), (2, 1, 1)]).unwrap();
        assert_eq!(dissimilar_h(&g, &Tiling::default()).unwrap().edges.len(), 2);
    }

    fn exchange_case(
        edges: &[(usize, usize, usize)],
        n: usize,
        tiling: Vec<Vec<usize>>,
    ) -> (BlowupGraph, Tiling, Replacement) {
        let g = BlowupGraph::new(3, n, edges.iter().copied()).unwrap();
        let t = Tiling::new(tiling.into_iter().map(TransversalCycle::new).collect());
        assert!(find_improvement(&g, &t).unwrap().is_none());
        assert_eq!(potential(&g, &t).unwrap(), (false, 2));
        let rep = exchange(&g, &t).unwrap().expect("exchange applies");
        (g, t, rep)
    }

    #[test]
    fn exchange_one_frees_a_bc_edge() {
        let edges = [
            (1, 0, 1),
            (1, 0, 2),
            (1, 1, 0),
            (1, 1, 1),
            (1, 1, 2),
            (1, 2, 0),
            (2, 0, 0),
            (2, 0, 1),
            (2, 0, 2),
            (2, 1, 0),
            (2, 1, 1),
            (2, 2, 0),
            (2, 2, 1),
            (3, 0, 1),
            (3, 2, 1),
            (3, 2, 2),
        ];
        let (g, t, rep) = exchange_case(&edges, 3, vec![vec![1, 0, 2]]);
        assert_eq!(rep.kind, MoveKind::ExchangeOne);
        let next = rep.apply(&t);
        assert!(validate_tiling(&g, &next).is_ok());
        assert_eq!(next.len(), t.len());
        assert!(potential(&g, &next).unwrap().0);
    }

    #[test]
    fn exchange_two_frees_a_bc_edge() {
        let edges = [
            (1, 0, 1),
            (1, 1, 0),
            (1, 1, 1),
            (1, 1, 2),
            (1, 1, 3),
            (1, 2, 0),
            (1, 2, 2),
            (1, 2, 3),
            (1, 3, 2),
            (1, 3, 3),
            (2, 0, 1),
            (2, 0, 3),
            (2, 1, 2),
            (2, 2, 2),
            (2, 3, 0),
            (2, 3, 2),
            (3, 0, 1),
            (3, 1, 1),
            (3, 1, 2),
            (3, 1, 3),
            (3, 2, 0),
            (3, 2, 1),
            (3, 2, 3),
            (3, 3, 0),
            (3, 3, 2),
        ];
        let (g, t, rep) = exchange_case(&edges, 4, vec![vec![3, 3, 2], vec![1, 0, 1]]);
        assert_eq!(rep.kind, MoveKind::ExchangeTwo);
        let next = rep.apply(&t);
        assert!(validate_tiling(&g, &next).is_ok());
        assert_eq!(next.len(), t.len());
        assert!(potential(&g, &next).unwrap().0);
    }

    #[test]
    fn exchange_inside_one_triangle_grows() {
        let edges = [
            (1, 0, 2),
            (1, 1, 0),
            (1, 1, 1),
            (1, 1, 2),
            (1, 2, 0),
            (1, 2, 2),
            (2, 0, 0),
            (2, 0, 1),
            (2, 0, 2),
            (2, 1, 0),
            (2, 2, 0),
            (3, 0, 1),
            (3, 0, 2),
            (3, 1, 0),
            (3, 1, 2),
            (3, 2, 0),
            (3, 2, 1),
            (3, 2, 2),
        ];
        let (g, t, rep) = exchange_case(&edges, 3, vec![vec![1, 0, 0]]);
        assert_eq!(rep.kind, MoveKind::ExchangeMerge);
        let next = rep.apply(&t);
        assert!(validate_tiling(&g, &next).is_ok());
        assert_eq!(next.len(), t.len() + 1);
    }

    #[test]
    fn rotation_raises_potential() {
        let edges = [
            (1, 0, 1),
            (1, 0, 2),
            (1, 1, 0),
            (1, 1, 1),
            (1, 1, 3),
            (1, 2, 2),
            (1, 3, 1),
            (1, 3, 2),
            (1, 3, 3),
            (2, 0, 3),
            (2, 1, 0),
            (2, 1, 3),
            (2, 2, 0),
            (2, 2, 2),
            (2, 3, 2),
            (3, 0, 1),
            (3, 2, 1),
            (3, 2, 2),
            (3, 2, 3),
            (3, 3, 0),
        ];
        let g = BlowupGraph::new(3, 4, edges).unwrap();
        let t = Tiling::new(vec![
            TransversalCycle::new(vec![3, 2, 2]),
            TransversalCycle::new(vec![1, 1, 0]),
        ]);
        assert!(find_improvement(&g, &t).unwrap().is_none());
        let rep = rotate(&g, &t).unwrap().expect("rotation applies");
        let next = rep.apply(&t);
        assert!(validate_tiling(&g, &next).is_ok());
        assert_eq!(next.len(), 2);
        assert!(potential(&g, &next).unwrap() > potential(&g, &t).unwrap());
    }

    #[test]
    fn no_rotation_at_top_potential() {
        // one uncovered B-C edge plus a disjoint A-B edge: nothing left to gain by rotating
        let g = BlowupGraph::new(3, 2, [(1, 0, 0), (2, 1, 1)]).unwrap();
        assert_eq!(potential(&g, &Tiling::default()).unwrap(), (true, 2));
        assert!(rotate(&g, &Tiling::default()).unwrap().is_none());
    }

    #[test]
    fn complete_reaches_factor_size() {
        let g = complete_blowup(3, 10).unwrap();
        let out = near_factor3(&g, 10_000).unwrap();
        assert!(out.tiling.len() >= 9);
        assert!(validate_tiling(&g, &out.tiling).is_ok());
    }

    #[test]
    fn haggkvist_fails_precondition() {
        let h = haggkvist_example(3, 1).unwrap();
        assert!(matches!(
            near_factor3(&h.graph, 100),
            Err(Swap3Error::Degrees { .. })
        ));
    }
}
