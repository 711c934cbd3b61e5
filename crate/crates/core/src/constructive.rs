//! Randomised factor construction: the one-round tiler on pools `U_i, W_i`,
//! absorbing sets built from linking sequences, and the driver that chains
//! them into a full transversal factor.

use crate::exact::{has_factor_within, linking_pattern, max_tiling_within, Budget};
use crate::graph::{validate_tiling, BlowupGraph, Tiling, TransversalCycle, VertexMask, VertexRef};
use crate::matching::BipartiteMatcher;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructiveError {
    #[error("pools are malformed: {0}")]
    BadPools(String),
    #[error("(C1) fails: {vertex} has {degree} neighbours in U_{part}, needs {needed}")]
    PoolDegree {
        vertex: VertexRef,
        part: usize,
        degree: usize,
        needed: usize,
    },
    #[error("(C2) fails: {vertex} has {degree} neighbours in W_{part}, needs {needed}")]
    FreshDegree {
        vertex: VertexRef,
        part: usize,
        degree: usize,
        needed: usize,
    },
    #[error("could not split part {part} after {attempts} attempts (stage: {stage})")]
    SplitExhausted {
        stage: String,
        part: usize,
        attempts: usize,
    },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(
        "linkedness check failed for ({v}, {w}): estimated fraction {estimate:.4} < {required:.4}"
    )]
    NotLinked {
        v: VertexRef,
        w: VertexRef,
        estimate: f64,
        required: f64,
    },
    #[error("sigma = {sigma} exceeds the bound {bound:e} required in faithful mode")]
    SigmaTooLarge { sigma: f64, bound: f64 },
    #[error("absorber concentration checks failed after {attempts} resamples: {detail}")]
    Concentration { attempts: usize, detail: String },
    #[error("absorber too small: probe {probe} is absorbed by {have} sequences, wanted {want}")]
    AbsorberShort {
        probe: usize,
        have: usize,
        want: usize,
    },
    #[error(
        "σn = {room:.2} leaves no room for one gadget, which takes {per_gadget} vertices per part"
    )]
    NoRoom { room: f64, per_gadget: usize },
    #[error("leftover set is unbalanced: part sizes {0:?}")]
    Unbalanced(Vec<usize>),
    #[error("leftover overlaps the absorbing set at {0}")]
    OverlapsAbsorber(VertexRef),
    #[error("degree condition fails: δ* = {delta_star} < {needed:.2}")]
    BelowThreshold { delta_star: usize, needed: f64 },
}

/// Smallest integer `>= x`, tolerant to floating noise at exact integers.
fn ceil_tol(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// Vertices of `part ± 1` and their adjacency to a pool inside `part`.
struct Observers {
    verts: Vec<VertexRef>,
    /// `adj[o][x]`: observer `o` sees pool element `x` (position in the pool)
    adj: Vec<Vec<bool>>,
}

impl Observers {
    fn new(g: &BlowupGraph, part: usize, pool: &[usize]) -> Self {
        let (prev, next) = (g.prev(part), g.next(part));
        let mut verts = Vec::with_capacity(2 * g.n());
        let mut adj = Vec::with_capacity(2 * g.n());
        for v in 0..g.n() {
            let row = g.forward_row(prev, v);
            verts.push(VertexRef::new(prev, v));
            adj.push(pool.iter().map(|&x| row.contains(x)).collect());
        }
        for v in 0..g.n() {
            let row = g.backward_row(next, v);
            verts.push(VertexRef::new(next, v));
            adj.push(pool.iter().map(|&x| row.contains(x)).collect());
        }
        Self { verts, adj }
    }

    fn degree(&self, o: usize, members: &[usize]) -> usize {
        members.iter().filter(|&&x| self.adj[o][x]).count()
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SplitStats {
    pub attempts: usize,
    pub repair_moves: usize,
}

/// Randomly partitions `pool` into `chunks` blocks of `size` so that every
/// vertex of the two neighbouring parts has at least `threshold` neighbours in
/// each block. Each attempt shuffles, then runs up to `repair_steps` improving
/// swaps between blocks; `repair_steps = 0` is plain rejection sampling.
#[allow(clippy::too_many_arguments)]
pub fn constrained_split<R: Rng + ?Sized>(
    g: &BlowupGraph,
    part: usize,
    pool: &[usize],
    chunks: usize,
    size: usize,
    threshold: usize,
    retries: usize,
    repair_steps: usize,
    rng: &mut R,
) -> Option<(Vec<Vec<usize>>, SplitStats)> {
    assert!(pool.len() >= chunks * size, "pool too small for the split");
    let obs = Observers::new(g, part, pool);
    let mut stats = SplitStats::default();
    let deficit = |c: usize| threshold.saturating_sub(c);
    for _ in 0..retries.max(1) {
        stats.attempts += 1;
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.shuffle(rng);
        let mut blocks: Vec<Vec<usize>> = order
            .chunks(size)
            .take(chunks)
            .map(|c| c.to_vec())
            .collect();
        let mut cnt: Vec<Vec<usize>> = (0..obs.verts.len())
            .map(|o| blocks.iter().map(|b| obs.degree(o, b)).collect())
            .collect();
        let total =
            |cnt: &Vec<Vec<usize>>| -> usize { cnt.iter().flatten().map(|&c| deficit(c)).sum() };
        let mut current = total(&cnt);
        let mut steps = 0;
        while current > 0 && steps < repair_steps {
            steps += 1;
            let bad: Vec<(usize, usize)> = (0..obs.verts.len())
                .flat_map(|o| (0..chunks).map(move |c| (o, c)))
                .filter(|&(o, c)| cnt[o][c] < threshold)
                .collect();
            let &(o, c) = bad.choose(rng).expect("deficit implies a violation");
            let outs: Vec<usize> = (0..size).filter(|&p| !obs.adj[o][blocks[c][p]]).collect();
            let mut best: Option<(isize, usize, usize, usize)> = None;
            for _ in 0..48 {
                let d = rng.gen_range(0..chunks);
                if d == c || outs.is_empty() {
                    continue;
                }
                let ins: Vec<usize> = (0..size).filter(|&q| obs.adj[o][blocks[d][q]]).collect();
                let (Some(&p), Some(&q)) = (outs.choose(rng), ins.choose(rng)) else {
                    continue;
                };
                let (x, y) = (blocks[c][p], blocks[d][q]);
                let mut delta = 0isize;
                for (o2, row) in obs.adj.iter().enumerate() {
                    let (ax, ay) = (row[x] as usize, row[y] as usize);
                    if ax == ay {
                        continue;
                    }
                    let (nc, nd) = (cnt[o2][c] + ay - ax, cnt[o2][d] + ax - ay);
                    delta += (deficit(nc) + deficit(nd)) as isize
                        - (deficit(cnt[o2][c]) + deficit(cnt[o2][d])) as isize;
                }
                if best.map_or(true, |b| delta < b.0) {
                    best = Some((delta, d, p, q));
                }
            }
            let Some((delta, d, p, q)) = best else {
                continue;
            };
            if delta > 0 {
                continue;
            }
            let (x, y) = (blocks[c][p], blocks[d][q]);
            for (o2, row) in obs.adj.iter().enumerate() {
                let (ax, ay) = (row[x] as usize, row[y] as usize);
                cnt[o2][c] = cnt[o2][c] + ay - ax;
                cnt[o2][d] = cnt[o2][d] + ax - ay;
            }
            blocks[c][p] = y;
            blocks[d][q] = x;
            stats.repair_moves += 1;
            current = (current as isize + delta) as usize;
        }
        if current == 0 {
            let out = blocks
                .into_iter()
                .map(|b| b.into_iter().map(|x| pool[x]).collect())
                .collect();
            return Some((out, stats));
        }
    }
    None
}

/// Input pools of one round: `u[i - 1]`, `w[i - 1]` are disjoint subsets of
/// `V_i`, each of size `mk`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundState {
    pub m: usize,
    pub u: Vec<Vec<usize>>,
    pub w: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RoundParams {
    pub sigma: f64,
    pub retries: usize,
    pub repair_steps: usize,
}

impl Default for RoundParams {
    fn default() -> Self {
        Self {
            sigma: 0.05,
            retries: 50,
            repair_steps: 400,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundOutput {
    pub tiling: Tiling,
    /// `next[i - 1] = (U_i ∪ W_i) \ V(tiling)`, sorted.
    pub next: Vec<Vec<usize>>,
    /// `chunks[i - 1][j - 1] = U_{i,j}`.
    pub chunks: Vec<Vec<Vec<usize>>>,
    /// `paths[j - 1]`: the `m` paths closed through `W_j`, listed from the
    /// end in `V_{j+1}` to the end in `V_{j-1}`.
    pub paths: Vec<Vec<Vec<VertexRef>>>,
    pub split: SplitStats,
}

fn degree_into(g: &BlowupGraph, v: VertexRef, part: usize, set: &[usize]) -> usize {
    let row = if part == g.next(v.part) {
        g.forward_row(v.part, v.index)
    } else {
        g.backward_row(v.part, v.index)
    };
    set.iter().filter(|&&x| row.contains(x)).count()
}

fn neighbours_of_part(g: &BlowupGraph, part: usize) -> impl Iterator<Item = VertexRef> + '_ {
    let (prev, next) = (g.prev(part), g.next(part));
    (0..g.n())
        .map(move |v| VertexRef::new(prev, v))
        .chain((0..g.n()).map(move |v| VertexRef::new(next, v)))
}

/// First vertex of `V_{part±1}` with fewer than `needed` neighbours in `set ⊆ V_part`.
fn weak_vertex(
    g: &BlowupGraph,
    part: usize,
    set: &[usize],
    needed: usize,
) -> Option<(VertexRef, usize)> {
    neighbours_of_part(g, part)
        .map(|v| (v, degree_into(g, v, part, set)))
        .find(|&(_, d)| d < needed)
}

fn check_round_state(g: &BlowupGraph, state: &RoundState) -> Result<(), ConstructiveError> {
    let (k, mk) = (g.k(), state.m * g.k());
    if state.m == 0 || state.u.len() != k || state.w.len() != k {
        return Err(ConstructiveError::BadPools(format!(
            "need m >= 1 and {k} pools of each kind"
        )));
    }
    for p in 0..k {
        let mut all: Vec<usize> = state.u[p].iter().chain(&state.w[p]).copied().collect();
        if state.u[p].len() != mk || state.w[p].len() != mk {
            return Err(ConstructiveError::BadPools(format!(
                "part {} pools must have size {mk}",
                p + 1
            )));
        }
        all.sort_unstable();
        all.dedup();
        if all.len() != 2 * mk || all.last().is_some_and(|&x| x >= g.n()) {
            return Err(ConstructiveError::BadPools(format!(
                "part {} pools overlap or leave V_{}",
                p + 1,
                p + 1
            )));
        }
    }
    Ok(())
}

/// One round: a tiling of size `mk` inside `⋃ U_i ∪ W_i` whose leftover pools
/// keep the `(1+σ)mk/2` degree bound.
pub fn round_tiling<R: Rng + ?Sized>(
    g: &BlowupGraph,
    state: &RoundState,
    params: RoundParams,
    rng: &mut R,
) -> Result<RoundOutput, ConstructiveError> {
    check_round_state(g, state)?;
    let (k, m) = (g.k(), state.m);
    let mk = m * k;
    let need_u = ceil_tol((1.0 + params.sigma) * mk as f64 / 2.0);
    let need_w = ceil_tol((1.0 + 1.0 / k as f64 + params.sigma) * mk as f64 / 2.0);
    for part in 1..=k {
        if let Some((vertex, degree)) = weak_vertex(g, part, &state.u[part - 1], need_u) {
            return Err(ConstructiveError::PoolDegree {
                vertex,
                part,
                degree,
                needed: need_u,
            });
        }
        if let Some((vertex, degree)) = weak_vertex(g, part, &state.w[part - 1], need_w) {
            return Err(ConstructiveError::FreshDegree {
                vertex,
                part,
                degree,
                needed: need_w,
            });
        }
    }

    // (1) split every U_i into k blocks with d(v, U_{i,j}) >= m/2
    let half = ceil_tol(m as f64 / 2.0);
    let mut split = SplitStats::default();
    let mut chunks = Vec::with_capacity(k);
    for part in 1..=k {
        let (blocks, stats) = constrained_split(
            g,
            part,
            &state.u[part - 1],
            k,
            m,
            half,
            params.retries,
            params.repair_steps,
            rng,
        )
        .ok_or_else(|| ConstructiveError::SplitExhausted {
            stage: "pool split".into(),
            part,
            attempts: params.retries.max(1),
        })?;
        split.attempts += stats.attempts;
        split.repair_moves += stats.repair_moves;
        chunks.push(blocks);
    }

    // (2) perfect matchings M_{i,j} between U_{i,j} and U_{i+1,j}; mate[i][j][a] = b
    let mut mate = vec![vec![Vec::new(); k]; k];
    for i in 1..=k {
        let next = g.next(i);
        for j in 0..k {
            let (left, right) = (&chunks[i - 1][j], &chunks[next - 1][j]);
            let adj: Vec<Vec<usize>> = left
                .iter()
                .map(|&u| {
                    (0..m)
                        .filter(|&b| g.forward_row(i, u).contains(right[b]))
                        .collect()
                })
                .collect();
            let mut matcher = BipartiteMatcher::new(&adj, m);
            if matcher.solve() != m {
                return Err(ConstructiveError::Invariant(format!(
                    "no perfect matching in G[U_{{{i},{}}}, U_{{{next},{}}}]",
                    j + 1,
                    j + 1
                )));
            }
            mate[i - 1][j] = matcher.mate_left.clone();
        }
    }

    // (3) paths of H_j from U_{j+1,j} to U_{j-1,j}; (4) close them through W_j
    let mut cycles = Vec::with_capacity(mk);
    let mut paths = Vec::with_capacity(k);
    let mut used_w: Vec<Vec<usize>> = vec![Vec::new(); k];
    for j in 1..=k {
        let jj = j - 1;
        let start = g.next(j);
        let mut system = Vec::with_capacity(m);
        for a in 0..m {
            let mut path = vec![VertexRef::new(start, chunks[start - 1][jj][a])];
            let (mut part, mut pos) = (start, a);
            while g.next(part) != j {
                pos = mate[part - 1][jj][pos];
                part = g.next(part);
                path.push(VertexRef::new(part, chunks[part - 1][jj][pos]));
            }
            system.push(path);
        }
        let mut taken = vec![false; mk];
        for path in &system {
            let (first, last) = (path[0], *path.last().expect("k - 1 >= 2 vertices"));
            let slot = (0..mk).find(|&s| {
                let x = state.w[jj][s];
                !taken[s]
                    && g.backward_row(start, first.index).contains(x)
                    && g.forward_row(last.part, last.index).contains(x)
            });
            let Some(s) = slot else {
                return Err(ConstructiveError::Invariant(format!(
                    "no common neighbour in W_{j} for path from {first}"
                )));
            };
            taken[s] = true;
            used_w[jj].push(state.w[jj][s]);
            let mut members = vec![0; k];
            members[jj] = state.w[jj][s];
            for v in path {
                members[v.part - 1] = v.index;
            }
            cycles.push(TransversalCycle::new(members));
        }
        paths.push(system);
    }
    let tiling = Tiling::new(cycles);
    validate_tiling(g, &tiling).map_err(|e| ConstructiveError::Invariant(e.to_string()))?;

    let next: Vec<Vec<usize>> = (1..=k)
        .map(|i| {
            let mut pool: Vec<usize> = chunks[i - 1][i - 1].clone();
            pool.extend(state.w[i - 1].iter().filter(|x| !used_w[i - 1].contains(x)));
            pool.sort_unstable();
            pool
        })
        .collect();
    for part in 1..=k {
        if let Some((vertex, degree)) = weak_vertex(g, part, &next[part - 1], need_u) {
            return Err(ConstructiveError::Invariant(format!(
                "leftover pool bound fails at {vertex}: {degree} < {need_u}"
            )));
        }
    }
    Ok(RoundOutput {
        tiling,
        next,
        chunks,
        paths,
        split,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AbsorberMode {
    /// Select sequences independently with the small probability, then prune.
    Faithful,
    /// Build disjoint gadgets directly until every probe transversal is
    /// absorbed often enough.
    Greedy,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AbsorberParams {
    pub eta: f64,
    pub t: usize,
    pub sigma: f64,
    pub retries: usize,
    /// Number of random probe transversals the absorber is tuned against.
    pub probes: usize,
    /// Same-part pairs sampled by the linkedness check.
    pub link_pairs: usize,
    pub link_samples: usize,
    /// Refuse faithful mode when σ exceeds its bound.
    pub enforce_sigma_bound: bool,
}

impl AbsorberParams {
    pub fn new(k: usize) -> Self {
        Self {
            eta: 0.05,
            t: k - 1,
            sigma: 0.05,
            retries: 50,
            probes: 16,
            link_pairs: 8,
            link_samples: 200,
            enforce_sigma_bound: true,
        }
    }

    /// `0.1 η^{k+1} / ((k(t+1))² + 1)`.
    pub fn sigma_bound(&self, k: usize) -> f64 {
        let ell = (k * (self.t + 1)) as f64;
        0.1 * self.eta.powi(k as i32 + 1) / (ell * ell + 1.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AbsorberSet {
    pub mode: AbsorberMode,
    pub params: AbsorberParams,
    /// Each sequence has `ℓ = k(t+1)` vertices; entry `j` (from 1) lies in
    /// part `((j - 1) mod k) + 1`.
    pub sequences: Vec<Vec<VertexRef>>,
    /// `|A ∩ V_i|`, the same for every part.
    pub per_part: usize,
    pub probes: Vec<Vec<VertexRef>>,
    /// For each probe, how many sequences absorb it.
    pub probe_hits: Vec<usize>,
}

impl AbsorberSet {
    pub fn ell(&self) -> usize {
        self.sequences.first().map_or(0, Vec::len)
    }

    pub fn mask(&self, k: usize, n: usize) -> VertexMask {
        VertexMask::from_vertices(k, n, self.sequences.iter().flatten().copied())
    }

    pub fn vertices(&self) -> Vec<VertexRef> {
        let mut all: Vec<VertexRef> = self.sequences.iter().flatten().copied().collect();
        all.sort();
        all
    }
}

fn factor_of(g: &BlowupGraph, vertices: impl IntoIterator<Item = VertexRef>) -> Option<Tiling> {
    let mask = VertexMask::from_vertices(g.k(), g.n(), vertices);
    if !mask.is_balanced() {
        return None;
    }
    let target = mask.count(1);
    let r = max_tiling_within(g, &mask, Budget::unlimited());
    (r.size == target).then_some(r.witness)
}

fn has_factor_on(g: &BlowupGraph, vertices: impl IntoIterator<Item = VertexRef>) -> bool {
    let mut mask = VertexMask::from_vertices(g.k(), g.n(), vertices);
    has_factor_within(g, &mut mask)
}

/// Does `seq` absorb the transversal `u`: both `seq` and `seq ∪ u` span factors?
pub fn absorbs(g: &BlowupGraph, seq: &[VertexRef], u: &[VertexRef]) -> bool {
    u.iter().all(|x| !seq.contains(x))
        && has_factor_on(g, seq.iter().copied())
        && has_factor_on(g, seq.iter().chain(u).copied())
}

fn random_transversal<R: Rng + ?Sized>(g: &BlowupGraph, rng: &mut R) -> Vec<VertexRef> {
    (1..=g.k())
        .map(|p| VertexRef::new(p, rng.gen_range(0..g.n())))
        .collect()
}

fn random_transversal_avoiding<R: Rng + ?Sized>(
    g: &BlowupGraph,
    used: &VertexMask,
    rng: &mut R,
) -> Option<Vec<VertexRef>> {
    (1..=g.k())
        .map(|p| {
            let free: Vec<usize> = (0..g.n())
                .filter(|&i| !used.contains(VertexRef::new(p, i)))
                .collect();
            free.choose(rng).map(|&i| VertexRef::new(p, i))
        })
        .collect()
}

/// Monte Carlo estimate of `#linking sequences / n^t` for the pair `(v, w)`.
pub fn estimate_linking_fraction<R: Rng + ?Sized>(
    g: &BlowupGraph,
    v: VertexRef,
    w: VertexRef,
    t: usize,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let pattern = linking_pattern(g.k(), v.part, t);
    let mut hits = 0usize;
    for _ in 0..samples {
        let seq: Vec<VertexRef> = pattern
            .iter()
            .map(|&p| VertexRef::new(p, rng.gen_range(0..g.n())))
            .collect();
        let mut sorted = seq.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() < seq.len() || seq.contains(&v) || seq.contains(&w) {
            continue;
        }
        if has_factor_on(g, seq.iter().chain([&v]).copied())
            && has_factor_on(g, seq.iter().chain([&w]).copied())
        {
            hits += 1;
        }
    }
    hits as f64 / samples.max(1) as f64
}

fn check_linkedness<R: Rng + ?Sized>(
    g: &BlowupGraph,
    params: &AbsorberParams,
    rng: &mut R,
) -> Result<(), ConstructiveError> {
    let required = 2.0 * params.eta;
    for _ in 0..params.link_pairs {
        let part = rng.gen_range(1..=g.k());
        let v = VertexRef::new(part, rng.gen_range(0..g.n()));
        let w = VertexRef::new(part, rng.gen_range(0..g.n()));
        let estimate = estimate_linking_fraction(g, v, w, params.t, params.link_samples, rng);
        if estimate < required {
            return Err(ConstructiveError::NotLinked {
                v,
                w,
                estimate,
                required,
            });
        }
    }
    Ok(())
}

/// Orders a balanced vertex set so that entry `j` (from 1) lies in part
/// `((j - 1) mod k) + 1`.
fn pattern_order(k: usize, set: &[VertexRef]) -> Vec<VertexRef> {
    let mut by_part: Vec<Vec<VertexRef>> = vec![Vec::new(); k];
    for &v in set {
        by_part[v.part - 1].push(v);
    }
    by_part.iter_mut().for_each(|p| p.sort());
    let rounds = by_part[0].len();
    (0..rounds)
        .flat_map(|r| by_part.iter().map(move |p| p[r]))
        .collect()
}

struct GadgetBuilder<'g> {
    g: &'g BlowupGraph,
    t: usize,
    tries: usize,
}

impl GadgetBuilder<'_> {
    fn free(&self, used: &VertexMask, avoid: &[VertexRef], v: VertexRef) -> bool {
        !used.contains(v) && !avoid.contains(&v)
    }

    fn random_cycle<R: Rng + ?Sized>(
        &self,
        used: &VertexMask,
        avoid: &[VertexRef],
        rng: &mut R,
    ) -> Option<Vec<VertexRef>> {
        let g = self.g;
        'outer: for _ in 0..self.tries {
            let mut walk = vec![VertexRef::new(1, rng.gen_range(0..g.n()))];
            if !self.free(used, avoid, walk[0]) {
                continue;
            }
            for part in 2..=g.k() {
                let prev = walk[part - 2];
                let options: Vec<usize> = g
                    .forward_row(prev.part, prev.index)
                    .ones()
                    .filter(|&i| self.free(used, avoid, VertexRef::new(part, i)))
                    .collect();
                let Some(&i) = options.choose(rng) else {
                    continue 'outer;
                };
                walk.push(VertexRef::new(part, i));
            }
            if g.adjacent(walk[g.k() - 1], walk[0]) {
                return Some(walk);
            }
        }
        None
    }

    /// A random `(c, u, t)`-linking sequence avoiding `avoid` and `used`.
    fn linking<R: Rng + ?Sized>(
        &self,
        c: VertexRef,
        u: VertexRef,
        used: &VertexMask,
        avoid: &[VertexRef],
        rng: &mut R,
    ) -> Option<Vec<VertexRef>> {
        let g = self.g;
        let pattern = linking_pattern(g.k(), c.part, self.t);
        for _ in 0..self.tries {
            let mut seq: Vec<VertexRef> = Vec::with_capacity(self.t);
            for &p in &pattern {
                // walk along neighbours when possible; dense graphs make this a good proposal
                let prev = seq.last().copied().unwrap_or(c);
                let options: Vec<usize> = if g.next(prev.part) == p {
                    g.forward_row(prev.part, prev.index).ones().collect()
                } else {
                    (0..g.n()).collect()
                };
                let options: Vec<usize> = options
                    .into_iter()
                    .filter(|&i| {
                        let x = VertexRef::new(p, i);
                        self.free(used, avoid, x) && x != c && x != u && !seq.contains(&x)
                    })
                    .collect();
                let Some(&i) = options.choose(rng) else { break };
                seq.push(VertexRef::new(p, i));
            }
            if seq.len() == self.t
                && has_factor_on(g, seq.iter().chain([&c]).copied())
                && has_factor_on(g, seq.iter().chain([&u]).copied())
            {
                return Some(seq);
            }
        }
        None
    }

    /// Cycle `c` plus one `(c_i, u_i, t)`-linking sequence per part.
    fn gadget<R: Rng + ?Sized>(
        &self,
        u: &[VertexRef],
        used: &VertexMask,
        rng: &mut R,
    ) -> Option<Vec<VertexRef>> {
        let cycle = self.random_cycle(used, u, rng)?;
        let mut avoid: Vec<VertexRef> = u.iter().chain(&cycle).copied().collect();
        let mut out = Vec::new();
        for (ci, ui) in cycle.iter().zip(u) {
            let l = self.linking(*ci, *ui, used, &avoid, rng)?;
            avoid.extend(&l);
            let mut block: Vec<VertexRef> = l;
            block.push(*ci);
            out.extend(pattern_order(self.g.k(), &block));
        }
        Some(out)
    }
}

/// Sample from a Poisson distribution (sum of small-mean Knuth draws).
fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> usize {
    let mut left = lambda;
    let mut total = 0;
    while left > 0.0 {
        let step = left.min(10.0);
        left -= step;
        let limit = (-step).exp();
        let mut prod: f64 = rng.gen();
        while prod > limit {
            total += 1;
            prod *= rng.gen::<f64>();
        }
    }
    total
}

/// Builds an absorbing set. Both modes first check linkedness by sampling.
pub fn build_absorber<R: Rng + ?Sized>(
    g: &BlowupGraph,
    params: AbsorberParams,
    mode: AbsorberMode,
    rng: &mut R,
) -> Result<AbsorberSet, ConstructiveError> {
    let k = g.k();
    if (params.t + 1) % k != 0 {
        return Err(ConstructiveError::BadPools(format!(
            "t + 1 = {} is not a multiple of k",
            params.t + 1
        )));
    }
    if mode == AbsorberMode::Faithful && params.enforce_sigma_bound {
        let bound = params.sigma_bound(k);
        if params.sigma > bound {
            return Err(ConstructiveError::SigmaTooLarge {
                sigma: params.sigma,
                bound,
            });
        }
    }
    check_linkedness(g, &params, rng)?;
    let probes: Vec<Vec<VertexRef>> = (0..params.probes)
        .map(|_| random_transversal(g, rng))
        .collect();
    match mode {
        AbsorberMode::Greedy => greedy_absorber(g, params, probes, rng),
        AbsorberMode::Faithful => faithful_absorber(g, params, probes, rng),
    }
}

fn finish(
    g: &BlowupGraph,
    mode: AbsorberMode,
    params: AbsorberParams,
    sequences: Vec<Vec<VertexRef>>,
    probes: Vec<Vec<VertexRef>>,
) -> AbsorberSet {
    let probe_hits = probes
        .iter()
        .map(|u| sequences.iter().filter(|s| absorbs(g, s, u)).count())
        .collect();
    let per_part = sequences.len() * (params.t + 1);
    AbsorberSet {
        mode,
        params,
        sequences,
        per_part,
        probes,
        probe_hits,
    }
}

fn greedy_absorber<R: Rng + ?Sized>(
    g: &BlowupGraph,
    params: AbsorberParams,
    mut probes: Vec<Vec<VertexRef>>,
    rng: &mut R,
) -> Result<AbsorberSet, ConstructiveError> {
    let (k, n) = (g.k(), g.n());
    let want = ceil_tol(params.sigma * params.sigma * n as f64).max(1);
    let cap = ((params.sigma * n as f64).floor() as usize) / (params.t + 1);
    if cap == 0 {
        return Err(ConstructiveError::NoRoom {
            room: params.sigma * n as f64,
            per_gadget: params.t + 1,
        });
    }
    let builder = GadgetBuilder {
        g,
        t: params.t,
        tries: 200,
    };
    let mut used = VertexMask::empty(k, n);
    let mut sequences: Vec<Vec<VertexRef>> = Vec::new();
    let mut hits = vec![0usize; probes.len()];
    let mut failures = 0;
    while let Some(probe) = (0..probes.len())
        .filter(|&p| hits[p] < want)
        .min_by_key(|&p| (hits[p], p))
    {
        if sequences.len() >= cap || failures >= params.retries {
            return Err(ConstructiveError::AbsorberShort {
                probe,
                have: hits[probe],
                want,
            });
        }
        let Some(seq) = builder.gadget(&probes[probe], &used, rng) else {
            failures += 1;
            continue;
        };
        seq.iter().for_each(|&v| used.insert(v));
        sequences.push(seq);
        // leftovers never meet A, so probes that now do are redrawn from V \ A
        for (p, u) in probes.iter_mut().enumerate() {
            if u.iter().any(|&v| used.contains(v)) {
                match random_transversal_avoiding(g, &used, rng) {
                    Some(fresh) => *u = fresh,
                    None => {
                        return Err(ConstructiveError::AbsorberShort {
                            probe: p,
                            have: 0,
                            want,
                        })
                    }
                }
                hits[p] = sequences.iter().filter(|s| absorbs(g, s, u)).count();
            } else if absorbs(g, sequences.last().expect("just pushed"), u) {
                hits[p] += 1;
            }
        }
    }
    Ok(finish(g, AbsorberMode::Greedy, params, sequences, probes))
}

fn faithful_absorber<R: Rng + ?Sized>(
    g: &BlowupGraph,
    params: AbsorberParams,
    probes: Vec<Vec<VertexRef>>,
    rng: &mut R,
) -> Result<AbsorberSet, ConstructiveError> {
    let (k, n) = (g.k(), g.n());
    let nf = n as f64;
    let ell = k * (params.t + 1);
    // p n^ℓ = 0.2 σ n sequences are expected
    let lambda = 0.2 * params.sigma * nf;
    let hit_floor = 0.1 * params.sigma * params.eta.powi(k as i32 + 1) * nf;
    let rep_cap = (ell * ell) as f64 * params.sigma * params.sigma * nf;
    let mut detail = String::new();
    for _ in 0..params.retries.max(1) {
        let count = poisson(lambda, rng);
        let drawn: Vec<Vec<VertexRef>> = (0..count)
            .map(|_| {
                (0..ell)
                    .map(|j| VertexRef::new(j % k + 1, rng.gen_range(0..n)))
                    .collect()
            })
            .collect();
        // sequences that repeat a vertex, internally or with another one
        let mut repeated = vec![false; drawn.len()];
        for (a, s) in drawn.iter().enumerate() {
            let mut sorted = s.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() < s.len() {
                repeated[a] = true;
            }
            for (b, s2) in drawn.iter().enumerate().skip(a + 1) {
                if s.iter().any(|v| s2.contains(v)) {
                    repeated[a] = true;
                    repeated[b] = true;
                }
            }
        }
        let rep = repeated.iter().filter(|&&r| r).count();
        let probe_hits: Vec<usize> = probes
            .iter()
            .map(|u| drawn.iter().filter(|s| absorbs(g, s, u)).count())
            .collect();
        let worst_probe = probe_hits.iter().copied().min().unwrap_or(0);
        if (count as f64) > params.sigma * nf
            || (rep as f64) > rep_cap
            || (worst_probe as f64) < hit_floor
        {
            detail = format!(
                "|A_rand| = {count} (cap {:.3}), |A_rep| = {rep} (cap {rep_cap:.3}), min probe hits = {worst_probe} (floor {hit_floor:.3e})",
                params.sigma * nf
            );
            continue;
        }
        // keep sequences that absorb at least one transversal we can exhibit
        let witnesses: Vec<Vec<VertexRef>> = probes
            .iter()
            .cloned()
            .chain((0..64).map(|_| random_transversal(g, rng)))
            .collect();
        let kept: Vec<Vec<VertexRef>> = drawn
            .into_iter()
            .zip(repeated)
            .filter(|(s, r)| !r && witnesses.iter().any(|u| absorbs(g, s, u)))
            .map(|(s, _)| s)
            .collect();
        return Ok(finish(g, AbsorberMode::Faithful, params, kept, probes));
    }
    Err(ConstructiveError::Concentration {
        attempts: params.retries.max(1),
        detail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AbsorbMethod {
    Assignment,
    Fallback,
}

#[derive(Debug, Clone, Serialize)]
pub struct AbsorbOutcome {
    pub success: bool,
    pub method: AbsorbMethod,
    /// Factor of `G[W ∪ A]` when one was found.
    pub factor: Option<Tiling>,
}

/// Tries to exhibit a factor of `G[W ∪ A]`: split `W` into transversals by
/// sorted index, give each its own absorbing sequence, and fall back to an
/// exact search on `G[W ∪ A]` if the assignment fails.
pub fn verify_absorber(
    g: &BlowupGraph,
    absorber: &AbsorberSet,
    w: &[VertexRef],
) -> Result<AbsorbOutcome, ConstructiveError> {
    let k = g.k();
    let mut by_part: Vec<Vec<usize>> = vec![Vec::new(); k];
    let a_mask = absorber.mask(k, g.n());
    for &v in w {
        g.check_vertex(v)
            .map_err(|e| ConstructiveError::BadPools(e.to_string()))?;
        if a_mask.contains(v) {
            return Err(ConstructiveError::OverlapsAbsorber(v));
        }
        by_part[v.part - 1].push(v.index);
    }
    if by_part.iter().any(|p| p.len() != by_part[0].len()) {
        return Err(ConstructiveError::Unbalanced(
            by_part.iter().map(Vec::len).collect(),
        ));
    }
    by_part.iter_mut().for_each(|p| {
        p.sort_unstable();
        p.dedup();
    });
    let count = by_part[0].len();
    let transversals: Vec<Vec<VertexRef>> = (0..count)
        .map(|r| {
            (1..=k)
                .map(|p| VertexRef::new(p, by_part[p - 1][r]))
                .collect()
        })
        .collect();

    let adj: Vec<Vec<usize>> = transversals
        .iter()
        .map(|u| {
            (0..absorber.sequences.len())
                .filter(|&s| absorbs(g, &absorber.sequences[s], u))
                .collect()
        })
        .collect();
    let mut matcher = BipartiteMatcher::new(&adj, absorber.sequences.len());
    if matcher.solve() == count {
        let mut cycles = Vec::new();
        let mut assembled = true;
        for (s, seq) in absorber.sequences.iter().enumerate() {
            let part: Vec<VertexRef> = match matcher.mate_right[s] {
                usize::MAX => seq.clone(),
                u => seq.iter().chain(&transversals[u]).copied().collect(),
            };
            match factor_of(g, part) {
                Some(t) => cycles.extend(t.cycles),
                None => assembled = false,
            }
        }
        let factor = Tiling::new(cycles);
        if assembled
            && validate_tiling(g, &factor).is_ok()
            && factor.len() == absorber.per_part + count
        {
            return Ok(AbsorbOutcome {
                success: true,
                method: AbsorbMethod::Assignment,
                factor: Some(factor),
            });
        }
    }
    let factor = factor_of(
        g,
        absorber
            .vertices()
            .into_iter()
            .chain(transversals.into_iter().flatten()),
    );
    Ok(AbsorbOutcome {
        success: factor.is_some(),
        method: AbsorbMethod::Fallback,
        factor,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsympParams {
    pub eta: f64,
    pub sigma: f64,
    pub retries: usize,
    pub repair_steps: usize,
    /// Lower bound on the block size `m`; the formula `⌊σ²n/(2k)⌋` is zero at
    /// every size a desk run can reach.
    pub min_m: usize,
    pub cleanup_budget_ms: u64,
}

impl Default for AsympParams {
    fn default() -> Self {
        Self {
            eta: 0.05,
            sigma: 0.05,
            retries: 50,
            repair_steps: 400,
            min_m: 8,
            cleanup_budget_ms: 2_000,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StageLog {
    pub sigma: f64,
    pub m: usize,
    pub rounds_planned: usize,
    pub absorber_sequences: usize,
    pub absorber_per_part: usize,
    pub chunk_split: SplitStats,
    pub rounds: Vec<RoundLog>,
    pub cleanup_size: usize,
    pub leftover_transversals: usize,
    pub absorb_method: Option<AbsorbMethod>,
    pub millis: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundLog {
    pub size: usize,
    pub split: SplitStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsympOutcome {
    pub tiling: Tiling,
    pub log: StageLog,
}

#[derive(Debug, Clone, Error)]
#[error("stage {stage} failed: {source}")]
pub struct AsympFailure {
    pub stage: String,
    pub source: ConstructiveError,
    pub log: Box<StageLog>,
}

/// Full pipeline: absorber, chunked rounds, a clean-up tiling of the
/// remainder, and absorption of what is still uncovered.
pub fn asymp_factor<R: Rng + ?Sized>(
    g: &BlowupGraph,
    epsilon: f64,
    params: AsympParams,
    rng: &mut R,
) -> Result<AsympOutcome, AsympFailure> {
    let started = Instant::now();
    let (k, n) = (g.k(), g.n());
    let mut log = StageLog {
        sigma: params.sigma,
        ..StageLog::default()
    };
    let fail = |stage: &str, source: ConstructiveError, log: &StageLog| AsympFailure {
        stage: stage.to_string(),
        source,
        log: Box::new(log.clone()),
    };
    let delta_star = g.degree_profile().delta_star;
    let needed = (1.0 + 1.0 / k as f64 + epsilon) * n as f64 / 2.0;
    if (delta_star as f64) < needed - 1e-9 {
        return Err(fail(
            "precondition",
            ConstructiveError::BelowThreshold { delta_star, needed },
            &log,
        ));
    }

    let absorber_params = AbsorberParams {
        eta: params.eta,
        sigma: params.sigma,
        retries: params.retries,
        ..AbsorberParams::new(k)
    };
    let absorber = build_absorber(g, absorber_params, AbsorberMode::Greedy, rng)
        .map_err(|e| fail("absorber", e, &log))?;
    log.absorber_sequences = absorber.sequences.len();
    log.absorber_per_part = absorber.per_part;
    let a_mask = absorber.mask(k, n);

    let sigma = params.sigma;
    let m = ((sigma * sigma * n as f64 / (2 * k) as f64).floor() as usize).max(params.min_m);
    let mk = m * k;
    log.m = m;
    let room = n - absorber.per_part;
    if room < 2 * mk {
        let e = ConstructiveError::BadPools(format!(
            "{room} free vertices per part cannot hold two blocks of {mk}"
        ));
        return Err(fail("parameters", e, &log));
    }
    let rounds = room / mk - 1;
    log.rounds_planned = rounds;

    // V'_i: random (T+1)mk vertices outside A, cut into chunks W_{i,0..T}
    let threshold = ceil_tol((1.0 + 1.0 / k as f64 + sigma) * mk as f64 / 2.0);
    let mut chunks: Vec<Vec<Vec<usize>>> = Vec::with_capacity(k);
    for part in 1..=k {
        let mut free: Vec<usize> = (0..n)
            .filter(|&i| !a_mask.contains(VertexRef::new(part, i)))
            .collect();
        free.shuffle(rng);
        free.truncate((rounds + 1) * mk);
        let (blocks, stats) = constrained_split(
            g,
            part,
            &free,
            rounds + 1,
            mk,
            threshold,
            params.retries,
            params.repair_steps,
            rng,
        )
        .ok_or_else(|| {
            let e = ConstructiveError::SplitExhausted {
                stage: "chunk split".into(),
                part,
                attempts: params.retries,
            };
            fail("chunk split", e, &log)
        })?;
        log.chunk_split.attempts += stats.attempts;
        log.chunk_split.repair_moves += stats.repair_moves;
        chunks.push(blocks);
    }

    let round_params = RoundParams {
        sigma,
        retries: params.retries,
        repair_steps: params.repair_steps,
    };
    let mut pools: Vec<Vec<usize>> = chunks.iter().map(|c| c[0].clone()).collect();
    let mut cycles: Vec<TransversalCycle> = Vec::new();
    for t in 1..=rounds {
        let state = RoundState {
            m,
            u: pools.clone(),
            w: chunks.iter().map(|c| c[t].clone()).collect(),
        };
        let out = round_tiling(g, &state, round_params, rng)
            .map_err(|e| fail(&format!("round {t}"), e, &log))?;
        log.rounds.push(RoundLog {
            size: out.tiling.len(),
            split: out.split,
        });
        cycles.extend(out.tiling.cycles);
        pools = out.next;
    }

    // clean-up: tile whatever is left outside A as far as an exact search allows
    let mut leftover = VertexMask::full(k, n);
    leftover.difference_with(&a_mask);
    for c in &cycles {
        c.vertices().for_each(|v| leftover.remove(v));
    }
    let cleanup = max_tiling_within(g, &leftover, Budget::millis(params.cleanup_budget_ms));
    log.cleanup_size = cleanup.size;
    for c in &cleanup.witness.cycles {
        c.vertices().for_each(|v| leftover.remove(v));
    }
    cycles.extend(cleanup.witness.cycles);
    let w: Vec<VertexRef> = leftover.vertices().collect();
    log.leftover_transversals = w.len() / k;

    let absorbed = verify_absorber(g, &absorber, &w).map_err(|e| fail("absorb", e, &log))?;
    log.absorb_method = Some(absorbed.method);
    let Some(rest) = absorbed.factor else {
        let e = ConstructiveError::Invariant(format!(
            "{} leftover transversals could not be absorbed",
            w.len() / k
        ));
        return Err(fail("absorb", e, &log));
    };
    cycles.extend(rest.cycles);
    let tiling = Tiling::new(cycles);
    log.millis = started.elapsed().as_millis() as u64;
    if let Err(e) = validate_tiling(g, &tiling) {
        return Err(fail(
            "assembly",
            ConstructiveError::Invariant(e.to_string()),
            &log,
        ));
    }
    if tiling.len() != n {
        let e = ConstructiveError::Invariant(format!(
            "factor has {} cycles, expected {n}",
            tiling.len()
        ));
        return Err(fail("assembly", e, &log));
    }
    Ok(AsympOutcome { tiling, log })
}

/// Exact cross-check used by tests: does `G[W ∪ A]` have a factor at all?
pub fn absorbable_exactly(g: &BlowupGraph, absorber: &AbsorberSet, w: &[VertexRef]) -> bool {
    factor_of(g, absorber.vertices().into_iter().chain(w.iter().copied())).is_some()
}
