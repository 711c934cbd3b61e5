//! Exhaustive oracles: maximum tilings, cover numbers, independence numbers
//! and linking-sequence counts. Meant for desk-scale instances; every search
//! takes an optional wall-clock budget and reports whether it finished.

use crate::graph::{
    wrap_part, BlowupGraph, GraphError, Tiling, TransversalCycle, VertexMask, VertexRef,
};
use fixedbitset::FixedBitSet;
use serde::Serialize;
use std::collections::HashMap;
use std::ops::ControlFlow;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("{v} and {w} lie in different parts")]
    PartMismatch { v: VertexRef, w: VertexRef },
    #[error("t + 1 = {} is not divisible by k = {k}", t + 1)]
    BadLength { t: usize, k: usize },
    #[error("search exceeded its budget after {millis} ms")]
    BudgetExceeded { millis: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Wall-clock limit shared by the searches.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    start: Instant,
    limit: Option<Duration>,
}

impl Budget {
    pub fn new(limit: Option<Duration>) -> Self {
        Self {
            start: Instant::now(),
            limit,
        }
    }

    pub fn unlimited() -> Self {
        Self::new(None)
    }

    pub fn millis(limit: u64) -> Self {
        Self::new(Some(Duration::from_millis(limit)))
    }

    pub fn exhausted(&self) -> bool {
        self.limit.is_some_and(|l| self.start.elapsed() >= l)
    }

    pub fn elapsed_millis(&self) -> u64 {
        self.start.elapsed().as_millis() as u64
    }
}

/// Visits every transversal cycle of `g[alive]` through `(1, first)` in
/// lexicographic order of member tuples, stopping when `visit` breaks.
pub fn for_each_cycle_through<F>(
    g: &BlowupGraph,
    alive: &VertexMask,
    first: usize,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    if !alive.part(1).contains(first) {
        return ControlFlow::Continue(());
    }
    let mut closing = g.backward_row(1, first).clone();
    closing.intersect_with(alive.part(g.k()));
    if closing.is_clear() {
        return ControlFlow::Continue(());
    }
    let mut path = Vec::with_capacity(g.k());
    path.push(first);
    extend_path(g, alive, &closing, &mut path, visit)
}

fn extend_path<F>(
    g: &BlowupGraph,
    alive: &VertexMask,
    closing: &FixedBitSet,
    path: &mut Vec<usize>,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let part = path.len() + 1;
    let mut cand = g.forward_row(part - 1, path[part - 2]).clone();
    cand.intersect_with(alive.part(part));
    let last = part == g.k();
    if last {
        cand.intersect_with(closing);
    }
    for w in cand.ones() {
        path.push(w);
        let flow = if last {
            visit(path)
        } else {
            extend_path(g, alive, closing, path, visit)
        };
        path.pop();
        flow?;
    }
    ControlFlow::Continue(())
}

/// Every transversal cycle of `g[alive]`, lexicographically ordered.
pub fn all_cycles(g: &BlowupGraph, alive: &VertexMask) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for first in alive.part(1).ones() {
        let _ = for_each_cycle_through(g, alive, first, &mut |c: &[usize]| {
            out.push(c.to_vec());
            ControlFlow::Continue(())
        });
    }
    out
}

pub fn has_cycle(g: &BlowupGraph, alive: &VertexMask) -> bool {
    alive.part(1).ones().any(|first| {
        for_each_cycle_through(g, alive, first, &mut |_: &[usize]| ControlFlow::Break(()))
            .is_break()
    })
}

/// True iff every transversal cycle of `g` meets `z`.
pub fn is_cover(g: &BlowupGraph, z: &[VertexRef]) -> bool {
    let mut alive = VertexMask::full(g.k(), g.n());
    for &v in z {
        if v.part >= 1 && v.part <= g.k() && v.index < g.n() {
            alive.remove(v);
        }
    }
    !has_cycle(g, &alive)
}

#[derive(Debug, Clone, Serialize)]
pub struct TilingResult {
    pub size: usize,
    pub witness: Tiling,
    pub optimal: bool,
    pub nodes_expanded: u64,
    pub millis: u64,
}

struct TilingSearch<'g> {
    g: &'g BlowupGraph,
    budget: Budget,
    nodes: u64,
    current: Vec<TransversalCycle>,
    best: Vec<TransversalCycle>,
    ceiling: usize,
    aborted: bool,
    /// Upper bounds on how many more cycles fit, keyed by the live vertex set.
    seen: HashMap<Vec<usize>, usize>,
}

const MEMO_LIMIT: usize = 1 << 22;

fn mask_key(alive: &VertexMask) -> Vec<usize> {
    (1..=alive.k())
        .flat_map(|p| alive.part(p).as_slice().iter().copied())
        .collect()
}

impl TilingSearch<'_> {
    fn run(&mut self, alive: &mut VertexMask) {
        self.nodes += 1;
        if self.nodes % 256 == 0 && self.budget.exhausted() {
            self.aborted = true;
        }
        if self.aborted || self.best.len() == self.ceiling {
            return;
        }
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        if self.current.len() + alive.min_count() <= self.best.len() {
            return;
        }
        let key = mask_key(alive);
        if self
            .seen
            .get(&key)
            .is_some_and(|&more| self.current.len() + more <= self.best.len())
        {
            return;
        }
        self.branch(alive);
        if !self.aborted && self.seen.len() < MEMO_LIMIT {
            // every branch was either explored or cut against the incumbent
            self.seen
                .insert(key, self.best.len().saturating_sub(self.current.len()));
        }
    }

    fn branch(&mut self, alive: &mut VertexMask) {
        let Some(v) = alive.part(1).ones().next() else {
            return;
        };
        let mut after = None;
        loop {
            let Some((cycles, done)) =
                cycle_chunk(self.g, alive, v, after.as_deref(), Some(&self.budget))
            else {
                self.aborted = true;
                return;
            };
            after = cycles.last().cloned();
            for members in cycles {
                let cycle = TransversalCycle::new(members);
                for u in cycle.vertices() {
                    alive.remove(u);
                }
                self.current.push(cycle);
                self.run(alive);
                let cycle = self.current.pop().expect("pushed above");
                for u in cycle.vertices() {
                    alive.insert(u);
                }
                if self.aborted || self.best.len() == self.ceiling {
                    return;
                }
            }
            if done {
                break;
            }
        }
        let v = VertexRef::new(1, v);
        alive.remove(v);
        self.run(alive);
        alive.insert(v);
    }
}

/// Maximum transversal tiling of `g`.
pub fn max_tiling(g: &BlowupGraph, budget: Budget) -> TilingResult {
    max_tiling_within(g, &VertexMask::full(g.k(), g.n()), budget)
}

/// Maximum transversal tiling of `g[alive]`. Branches on the lowest live
/// vertex of `V_1`: each cycle through it, then leaving it uncovered.
pub fn max_tiling_within(g: &BlowupGraph, alive: &VertexMask, budget: Budget) -> TilingResult {
    let mut alive = alive.clone();
    let mut search = TilingSearch {
        g,
        budget,
        nodes: 0,
        current: Vec::new(),
        best: Vec::new(),
        ceiling: alive.min_count(),
        aborted: false,
        seen: HashMap::new(),
    };
    search.run(&mut alive);
    TilingResult {
        size: search.best.len(),
        witness: Tiling::new(search.best),
        optimal: !search.aborted,
        nodes_expanded: search.nodes,
        millis: budget.elapsed_millis(),
    }
}

/// Whether `g[alive]` has a transversal factor (all live vertices covered).
pub fn has_factor_within(g: &BlowupGraph, alive: &mut VertexMask) -> bool {
    if !alive.is_balanced() {
        return false;
    }
    let Some(v) = alive.part(1).ones().next() else {
        return true;
    };
    let mut after = None;
    loop {
        let (cycles, done) = cycle_chunk(g, alive, v, after.as_deref(), None).expect("no budget");
        after = cycles.last().cloned();
        for members in cycles {
            let verts: Vec<VertexRef> = members
                .iter()
                .enumerate()
                .map(|(p, &i)| VertexRef::new(p + 1, i))
                .collect();
            verts.iter().for_each(|&u| alive.remove(u));
            let found = has_factor_within(g, alive);
            verts.iter().for_each(|&u| alive.insert(u));
            if found {
                return true;
            }
        }
        if done {
            return false;
        }
    }
}

const CYCLE_CHUNK: usize = 4096;

/// Up to `CYCLE_CHUNK` cycles through `(1, first)` that come after `after` in
/// lexicographic order, and whether the enumeration finished. Dense graphs
/// with long cycles have far too many cycles through one vertex to hold at
/// once. `None` when the budget ran out while enumerating.
fn cycle_chunk(
    g: &BlowupGraph,
    alive: &VertexMask,
    first: usize,
    after: Option<&[usize]>,
    budget: Option<&Budget>,
) -> Option<(Vec<Vec<usize>>, bool)> {
    let mut out = Vec::new();
    let mut visited = 0u64;
    let mut out_of_time = false;
    let flow = for_each_cycle_through(g, alive, first, &mut |c: &[usize]| {
        visited += 1;
        if visited % 4096 == 0 && budget.is_some_and(Budget::exhausted) {
            out_of_time = true;
            return ControlFlow::Break(());
        }
        if after.is_some_and(|a| c <= a) {
            return ControlFlow::Continue(());
        }
        out.push(c.to_vec());
        if out.len() == CYCLE_CHUNK {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    (!out_of_time).then_some((out, flow.is_continue()))
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverResult {
    pub size: usize,
    pub witness: Vec<VertexRef>,
    pub optimal: bool,
    pub nodes_expanded: u64,
    pub millis: u64,
}

struct CoverSearch {
    cycles: Vec<Vec<usize>>,
    /// cycle ids through each global vertex
    incident: Vec<Vec<usize>>,
    hits: Vec<u32>,
    chosen: Vec<bool>,
    forbidden: Vec<bool>,
    current: Vec<usize>,
    best: Vec<usize>,
    floor: usize,
    budget: Budget,
    nodes: u64,
    aborted: bool,
}

impl CoverSearch {
    /// Size of a greedy family of unhit cycles pairwise disjoint on
    /// non-forbidden vertices; `None` if some unhit cycle is entirely forbidden.
    fn packing_bound(&self) -> Option<usize> {
        let mut used = vec![false; self.chosen.len()];
        let mut count = 0;
        for (c, cycle) in self.cycles.iter().enumerate() {
            if self.hits[c] > 0 {
                continue;
            }
            let mut open = cycle.iter().filter(|&&v| !self.forbidden[v]).peekable();
            open.peek()?;
            if cycle.iter().all(|&v| self.forbidden[v] || !used[v]) {
                cycle
                    .iter()
                    .filter(|&&v| !self.forbidden[v])
                    .for_each(|&v| used[v] = true);
                count += 1;
            }
        }
        Some(count)
    }

    fn set(&mut self, v: usize, on: bool) {
        self.chosen[v] = on;
        for &c in &self.incident[v] {
            if on {
                self.hits[c] += 1;
            } else {
                self.hits[c] -= 1;
            }
        }
    }

    fn run(&mut self) {
        self.nodes += 1;
        if self.nodes % 128 == 0 && self.budget.exhausted() {
            self.aborted = true;
        }
        if self.aborted || self.best.len() <= self.floor {
            return;
        }
        let Some(bound) = self.packing_bound() else {
            return;
        };
        if self.current.len() + bound >= self.best.len() {
            return;
        }
        let Some(open) = self.hits.iter().position(|&h| h == 0) else {
            self.best = self.current.clone();
            return;
        };
        let branch: Vec<usize> = self.cycles[open]
            .iter()
            .copied()
            .filter(|&v| !self.forbidden[v])
            .collect();
        let mut banned = Vec::new();
        for v in branch {
            self.set(v, true);
            self.current.push(v);
            self.run();
            self.current.pop();
            self.set(v, false);
            if self.aborted || self.best.len() <= self.floor {
                break;
            }
            self.forbidden[v] = true;
            banned.push(v);
        }
        for v in banned {
            self.forbidden[v] = false;
        }
    }
}

/// Smallest vertex set meeting every transversal cycle.
///
/// The incumbent starts as the best of `upper_hint` and the smallest part;
/// a maximum tiling gives the matching lower bound and often closes the gap
/// before any branching.
pub fn cover_number(
    g: &BlowupGraph,
    upper_hint: Option<Vec<VertexRef>>,
    budget: Budget,
) -> CoverResult {
    let full = VertexMask::full(g.k(), g.n());
    let cycles: Vec<Vec<usize>> = all_cycles(g, &full)
        .into_iter()
        .map(|c| {
            c.iter()
                .enumerate()
                .map(|(p, &i)| g.global_id(VertexRef::new(p + 1, i)))
                .collect()
        })
        .collect();
    let mut incident = vec![Vec::new(); g.vertex_count()];
    for (c, cycle) in cycles.iter().enumerate() {
        for &v in cycle {
            incident[v].push(c);
        }
    }
    let mut best: Vec<usize> = (0..g.n()).collect();
    if let Some(hint) = upper_hint.filter(|h| is_cover(g, h)) {
        let mut ids: Vec<usize> = hint.iter().map(|&v| g.global_id(v)).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() < best.len() {
            best = ids;
        }
    }
    if cycles.is_empty() {
        best.clear();
    }
    let tiling = max_tiling(g, budget);
    let mut search = CoverSearch {
        hits: vec![0; cycles.len()],
        cycles,
        incident,
        chosen: vec![false; g.vertex_count()],
        forbidden: vec![false; g.vertex_count()],
        current: Vec::new(),
        best,
        floor: tiling.size,
        budget,
        nodes: tiling.nodes_expanded,
        aborted: false,
    };
    search.run();
    let mut witness: Vec<VertexRef> = search.best.iter().map(|&id| g.from_global_id(id)).collect();
    witness.sort();
    CoverResult {
        size: witness.len(),
        witness,
        optimal: !search.aborted,
        nodes_expanded: search.nodes,
        millis: budget.elapsed_millis(),
    }
}

/// Maximum independent set size of `g` as an ordinary graph on `kn` vertices.
pub fn independence_number(g: &BlowupGraph) -> usize {
    let total = g.vertex_count();
    let mut adj = vec![FixedBitSet::with_capacity(total); total];
    for (part, u, w) in g.edges() {
        let a = g.global_id(VertexRef::new(part, u));
        let b = g.global_id(VertexRef::new(g.next(part), w));
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut cand = FixedBitSet::with_capacity(total);
    cand.insert_range(..);
    let mut best = g.n();
    mis(&adj, cand, 0, &mut best);
    best
}

fn mis(adj: &[FixedBitSet], mut cand: FixedBitSet, size: usize, best: &mut usize) {
    loop {
        let left = cand.count_ones(..);
        if size + left <= *best {
            return;
        }
        // isolated candidates always belong to some maximum set
        let pivot = cand
            .ones()
            .max_by_key(|&v| (adj[v].intersection_count(&cand), std::cmp::Reverse(v)));
        let Some(v) = pivot else {
            *best = (*best).max(size);
            return;
        };
        if adj[v].intersection_count(&cand) == 0 {
            let isolated: Vec<usize> = cand
                .ones()
                .filter(|&u| adj[u].intersection_count(&cand) == 0)
                .collect();
            let gain = isolated.len();
            isolated.into_iter().for_each(|u| cand.set(u, false));
            return mis(adj, cand, size + gain, best);
        }
        let mut with = cand.clone();
        with.set(v, false);
        with.difference_with(&adj[v]);
        mis(adj, with, size + 1, best);
        cand.set(v, false);
    }
}

/// Parts, in order, of the `t` entries of a linking sequence for a vertex of `part`.
pub fn linking_pattern(k: usize, part: usize, t: usize) -> Vec<usize> {
    (1..=t).map(|j| wrap_part(k, (part + j) as isize)).collect()
}

fn check_linking_args(
    g: &BlowupGraph,
    v: VertexRef,
    w: VertexRef,
    t: usize,
) -> Result<(), ExactError> {
    g.check_vertex(v)?;
    g.check_vertex(w)?;
    if v.part != w.part {
        return Err(ExactError::PartMismatch { v, w });
    }
    if (t + 1) % g.k() != 0 {
        return Err(ExactError::BadLength { t, k: g.k() });
    }
    Ok(())
}

/// Candidate entry sets for linking sequences of vertices in `part`:
/// `(t + 1)/k - 1` vertices from `part` and `(t + 1)/k` from every other part,
/// grouped per part in increasing order.
struct EntrySets {
    per_part: Vec<Vec<Vec<usize>>>,
    /// Orderings of one set that follow the fixed part pattern.
    multiplicity: u64,
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, &mut Vec::new(), &mut out);
    out
}

fn factorial(m: usize) -> u64 {
    (1..=m as u64).product()
}

fn entry_sets(g: &BlowupGraph, part: usize, t: usize) -> EntrySets {
    let q = (t + 1) / g.k();
    let per_part = (1..=g.k())
        .map(|p| combinations(g.n(), if p == part { q - 1 } else { q }))
        .collect();
    let multiplicity = factorial(q).pow(g.k() as u32 - 1) * factorial(q - 1);
    EntrySets {
        per_part,
        multiplicity,
    }
}

/// Visits every product of per-part combinations (a candidate entry set).
fn for_each_entry_set(sets: &EntrySets, mut visit: impl FnMut(&[&Vec<usize>]) -> ControlFlow<()>) {
    let k = sets.per_part.len();
    if sets.per_part.iter().any(|c| c.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; k];
    loop {
        let pick: Vec<&Vec<usize>> = (0..k).map(|p| &sets.per_part[p][idx[p]]).collect();
        if visit(&pick).is_break() {
            return;
        }
        let mut p = k;
        loop {
            if p == 0 {
                return;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < sets.per_part[p].len() {
                break;
            }
            idx[p] = 0;
        }
    }
}

struct FactorMemo<'g> {
    g: &'g BlowupGraph,
    memo: HashMap<Vec<usize>, bool>,
}

impl<'g> FactorMemo<'g> {
    fn new(g: &'g BlowupGraph) -> Self {
        Self {
            g,
            memo: HashMap::new(),
        }
    }

    /// Factor check of the set `pick ∪ {extra}`, memoized on sorted global ids.
    fn has_factor(&mut self, pick: &[&Vec<usize>], extra: VertexRef) -> bool {
        let g = self.g;
        let mut key: Vec<usize> = pick
            .iter()
            .enumerate()
            .flat_map(|(p, set)| {
                set.iter()
                    .map(move |&i| g.global_id(VertexRef::new(p + 1, i)))
            })
            .collect();
        key.push(g.global_id(extra));
        key.sort_unstable();
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        let mut alive =
            VertexMask::from_vertices(g.k(), g.n(), key.iter().map(|&id| g.from_global_id(id)));
        let found = has_factor_within(g, &mut alive);
        self.memo.insert(key, found);
        found
    }
}

fn avoids(pick: &[&Vec<usize>], v: VertexRef) -> bool {
    !pick[v.part - 1].contains(&v.index)
}

/// Number of `(v, w, t)`-linking sequences, stopping once `cap` is reached.
///
/// Entry `j` of a sequence lies in part `part(v) + j` (cyclically), so a
/// sequence is an ordering of a balanced entry set that follows this pattern.
pub fn enumerate_linking(
    g: &BlowupGraph,
    v: VertexRef,
    w: VertexRef,
    t: usize,
    cap: Option<u64>,
) -> Result<u64, ExactError> {
    check_linking_args(g, v, w, t)?;
    let sets = entry_sets(g, v.part, t);
    let mut memo = FactorMemo::new(g);
    let mut count = 0u64;
    for_each_entry_set(&sets, |pick| {
        if avoids(pick, v)
            && avoids(pick, w)
            && memo.has_factor(pick, v)
            && memo.has_factor(pick, w)
        {
            count += sets.multiplicity;
            if cap.is_some_and(|c| count >= c) {
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    });
    Ok(cap.map_or(count, |c| count.min(c)))
}

/// All `(v, w, t)`-linking sequences, in lexicographic order of entries.
pub fn linking_sequences(
    g: &BlowupGraph,
    v: VertexRef,
    w: VertexRef,
    t: usize,
) -> Result<Vec<Vec<VertexRef>>, ExactError> {
    check_linking_args(g, v, w, t)?;
    let pattern = linking_pattern(g.k(), v.part, t);
    let mut out = Vec::new();
    let mut memo = FactorMemo::new(g);
    let mut seq: Vec<VertexRef> = Vec::with_capacity(t);
    fn go(
        g: &BlowupGraph,
        pattern: &[usize],
        ends: (VertexRef, VertexRef),
        seq: &mut Vec<VertexRef>,
        memo: &mut FactorMemo<'_>,
        out: &mut Vec<Vec<VertexRef>>,
    ) {
        if seq.len() == pattern.len() {
            let mut per_part = vec![Vec::new(); g.k()];
            for u in seq.iter() {
                per_part[u.part - 1].push(u.index);
            }
            per_part.iter_mut().for_each(|s| s.sort_unstable());
            let pick: Vec<&Vec<usize>> = per_part.iter().collect();
            if memo.has_factor(&pick, ends.0) && memo.has_factor(&pick, ends.1) {
                out.push(seq.clone());
            }
            return;
        }
        let part = pattern[seq.len()];
        for i in 0..g.n() {
            let u = VertexRef::new(part, i);
            if u == ends.0 || u == ends.1 || seq.contains(&u) {
                continue;
            }
            seq.push(u);
            go(g, pattern, ends, seq, memo, out);
            seq.pop();
        }
    }
    go(g, &pattern, (v, w), &mut seq, &mut memo, &mut out);
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkedReport {
    pub linked: bool,
    pub min_count: u64,
    pub threshold: f64,
    pub pair: (VertexRef, VertexRef),
}

/// Checks `(η, t)`-linkedness exhaustively over every same-part pair,
/// including `v = w`; the reported pair attains the minimum count (first in
/// lexicographic order on ties).
pub fn is_linked(
    g: &BlowupGraph,
    eta: f64,
    t: usize,
    budget: Budget,
) -> Result<LinkedReport, ExactError> {
    if (t + 1) % g.k() != 0 {
        return Err(ExactError::BadLength { t, k: g.k() });
    }
    let threshold = eta * (g.n() as f64).powi(t as i32);
    let mut worst: Option<(u64, VertexRef, VertexRef)> = None;
    let mut memo = FactorMemo::new(g);
    for part in 1..=g.k() {
        let sets = entry_sets(g, part, t);
        // valid[v][s]: entry set s completes v
        let mut valid = vec![Vec::new(); g.n()];
        let mut picks: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut out_of_time = false;
        for_each_entry_set(&sets, |pick| {
            if budget.exhausted() {
                out_of_time = true;
                return ControlFlow::Break(());
            }
            for (v, row) in valid.iter_mut().enumerate() {
                let vr = VertexRef::new(part, v);
                row.push(avoids(pick, vr) && memo.has_factor(pick, vr));
            }
            picks.push(pick.iter().map(|s| (*s).clone()).collect());
            ControlFlow::Continue(())
        });
        if out_of_time {
            return Err(ExactError::BudgetExceeded {
                millis: budget.elapsed_millis(),
            });
        }
        for v in 0..g.n() {
            for w in v..g.n() {
                let count = (0..picks.len())
                    .filter(|&s| valid[v][s] && valid[w][s])
                    .count() as u64
                    * sets.multiplicity;
                let (vr, wr) = (VertexRef::new(part, v), VertexRef::new(part, w));
                if worst.map_or(true, |(c, _, _)| count < c) {
                    worst = Some((count, vr, wr));
                }
            }
        }
    }
    let (min_count, a, b) = worst.expect("at least one pair");
    Ok(LinkedReport {
        linked: min_count as f64 >= threshold,
        min_count,
        threshold,
        pair: (a, b),
    })
}
