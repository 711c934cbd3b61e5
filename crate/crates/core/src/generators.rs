//! Instance generators: the extremal constructions, random instances with
//! prescribed per-pair minimum degrees, and the part-collapse reduction.

use crate::graph::{BlowupGraph, GraphError, Tiling, TransversalCycle, VertexRef};
use crate::io::Partition;
use crate::matching::{self, MatchingError};
use num_rational::Rational64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("need k >= 3 and m >= 1, got k = {k}, m = {m}")]
    BadExampleParameters { k: usize, m: usize },
    #[error("gamma = {0} is outside (3/4, 7/9]")]
    GammaOutOfRange(Rational64),
    #[error("no admissible n found for gamma = {0}")]
    NoAdmissibleN(Rational64),
    #[error("expected {expected} degree bounds, got {got}")]
    DeltaCount { expected: usize, got: usize },
    #[error("degree bound {delta} exceeds part size {n}")]
    DeltaOutOfRange { delta: usize, n: usize },
    #[error("collapsing needs k >= 4, got k = {0}")]
    CollapseTooSmall(usize),
    #[error("matching of pair {part} is not a perfect matching inside G: {reason}")]
    BadMatching { part: usize, reason: String },
    #[error("pair {pair} has no perfect matching; Hall violator {violator:?}")]
    NoPerfectMatching { pair: usize, violator: Vec<usize> },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Matching(#[from] MatchingError),
}

/// A generated graph together with its named vertex blocks.
#[derive(Debug, Clone)]
pub struct NamedInstance {
    pub graph: BlowupGraph,
    pub partition: Partition,
}

pub fn complete_blowup(k: usize, n: usize) -> Result<BlowupGraph, GraphError> {
    BlowupGraph::from_fn(k, n, |_, _, _| true)
}

fn block(part: usize, range: std::ops::Range<usize>) -> Vec<VertexRef> {
    range.map(|i| VertexRef::new(part, i)).collect()
}

/// The construction with `n = 2km` whose `δ* = (k+1)m - 1` and whose
/// `Z = Z_1 ∪ … ∪ Z_k` is a transversal cover of size `2mk - 1`.
///
/// Inside every part the blocks are laid out contiguously as `U_i, W_i, Z_i`.
pub fn haggkvist_example(k: usize, m: usize) -> Result<NamedInstance, GeneratorError> {
    if k < 3 || m < 1 {
        return Err(GeneratorError::BadExampleParameters { k, m });
    }
    let n = 2 * k * m;
    let mut partition = Partition::default();
    // block id per vertex: 0 = U, 1 = W, 2 = Z
    let mut kind = vec![vec![0u8; n]; k];
    for part in 1..=k {
        let u = (k - 1) * m;
        let w = if part == k {
            (k - 1) * m + 1
        } else {
            (k - 1) * m
        };
        partition.insert(format!("U_{part}"), block(part, 0..u));
        partition.insert(format!("W_{part}"), block(part, u..u + w));
        partition.insert(format!("Z_{part}"), block(part, u + w..n));
        for (i, slot) in kind[part - 1].iter_mut().enumerate() {
            *slot = if i < u {
                0
            } else if i < u + w {
                1
            } else {
                2
            };
        }
    }
    let graph = BlowupGraph::from_fn(k, n, |part, a, b| {
        let next = part % k + 1;
        let (ka, kb) = (kind[part - 1][a], kind[next - 1][b]);
        if ka == 2 || kb == 2 {
            return true;
        }
        if part < k {
            ka == kb
        } else {
            // V_k -> V_1: U_k with W_1, W_k with U_1
            ka != kb
        }
    })?;
    Ok(NamedInstance { graph, partition })
}

/// The triangle instance with a cover of size `(1 - 3ε)n < n` for a
/// rational `γ ∈ (3/4, 7/9]`.
#[derive(Debug, Clone)]
pub struct CoverExample {
    pub instance: NamedInstance,
    pub n: usize,
    pub gamma: Rational64,
    pub beta: Rational64,
    pub epsilon: Rational64,
}

impl CoverExample {
    /// `A_0 ∪ B_0 ∪ C_0`.
    pub fn cover(&self) -> Vec<VertexRef> {
        self.instance.partition.union_of(&["A_0", "B_0", "C_0"])
    }
}

fn as_integer(q: Rational64) -> Option<usize> {
    (q.is_integer() && q >= Rational64::from_integer(0)).then(|| q.to_integer() as usize)
}

/// Parts are `A = V_1`, `B = V_2`, `C = V_3`; each part lists its blocks
/// in the order `X_0, X_1, X_2, X_3`. `n` is the smallest admissible size and
/// `ε = 1/n`.
pub fn cover_example(p: i64, q: i64) -> Result<CoverExample, GeneratorError> {
    if q == 0 {
        return Err(GeneratorError::GammaOutOfRange(Rational64::from_integer(0)));
    }
    let gamma = Rational64::new(p, q);
    let r = |a: i64, b: i64| Rational64::new(a, b);
    if gamma <= r(3, 4) || gamma > r(7, 9) {
        return Err(GeneratorError::GammaOutOfRange(gamma));
    }
    let beta = r(4, 3) - gamma;
    let one = Rational64::from_integer(1);
    let limit = 1_000_000usize;
    let (n, epsilon, sizes) = (1..=limit)
        .find_map(|n| {
            let nr = Rational64::from_integer(n as i64);
            if gamma < r(3, 4) + one / nr {
                return None;
            }
            let epsilon = one / nr;
            let b_i = as_integer((one - gamma + epsilon) * nr)?;
            let a_i = as_integer((one - beta) * nr / 2)?;
            let b_0 = n.checked_sub(3 * b_i)?;
            let a_0 = n.checked_sub(3 * a_i)?;
            Some((n, epsilon, (a_0, a_i, b_0, b_i)))
        })
        .ok_or(GeneratorError::NoAdmissibleN(gamma))?;
    let (a_0, a_i, b_0, b_i) = sizes;

    // block index per vertex of each part; block 0 first
    let layout = |zero: usize, each: usize| -> Vec<usize> {
        let mut v = vec![0; zero];
        for j in 1..=3 {
            v.extend(std::iter::repeat(j).take(each));
        }
        v
    };
    let blocks = [layout(a_0, a_i), layout(b_0, b_i), layout(a_0, a_i)];
    let mut partition = Partition::default();
    for (part, name) in [(1, "A"), (2, "B"), (3, "C")] {
        let ids = &blocks[part - 1];
        for j in 0..=3 {
            let members = (0..n)
                .filter(|&i| ids[i] == j)
                .map(|i| VertexRef::new(part, i))
                .collect();
            partition.insert(format!("{name}_{j}"), members);
        }
    }
    let graph = BlowupGraph::from_fn(3, n, |part, u, w| {
        let (a, b) = (blocks[part - 1][u], blocks[part % 3][w]);
        if a == 0 || b == 0 {
            return true;
        }
        match part {
            // A-B: A_i joined to B_j for i != j
            1 => a != b,
            // B-C and C-A: matching indices only
            _ => a == b,
        }
    })?;
    Ok(CoverExample {
        instance: NamedInstance { graph, partition },
        n,
        gamma,
        beta,
        epsilon,
    })
}

/// Random instance where, for each pair `(i, i+1)`, every vertex on both
/// sides picks `deltas[i-1]` distinct partners uniformly at random; the pair's
/// edge set is the union, so `δ(G[V_i, V_{i+1}]) >= deltas[i-1]`.
pub fn random_min_degree(
    k: usize,
    n: usize,
    deltas: &[usize],
    seed: u64,
) -> Result<BlowupGraph, GeneratorError> {
    if deltas.len() != k {
        return Err(GeneratorError::DeltaCount {
            expected: k,
            got: deltas.len(),
        });
    }
    if let Some(&delta) = deltas.iter().find(|&&d| d > n) {
        return Err(GeneratorError::DeltaOutOfRange { delta, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for part in 1..=k {
        let d = deltas[part - 1];
        for u in 0..n {
            edges.extend(sample(&mut rng, n, d).into_iter().map(|w| (part, u, w)));
        }
        for w in 0..n {
            edges.extend(sample(&mut rng, n, d).into_iter().map(|u| (part, u, w)));
        }
    }
    Ok(BlowupGraph::new(k, n, edges)?)
}

/// Bookkeeping for one collapse: enough to lift tilings of the smaller graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapseMap {
    pub k_before: usize,
    /// Part whose vertices absorb their partners.
    pub kept: usize,
    /// Part that disappears (`kept + 1`).
    pub removed: usize,
    /// `mate[v]` is the vertex of `removed` merged into `(kept, v)`.
    pub mate: Vec<usize>,
    /// `new_to_old[p - 1]` is the original label of new part `p`.
    pub new_to_old: Vec<usize>,
}

impl CollapseMap {
    pub fn old_to_new(&self, old: usize) -> Option<usize> {
        self.new_to_old
            .iter()
            .position(|&o| o == old)
            .map(|p| p + 1)
    }

    pub fn lift_cycle(&self, cycle: &TransversalCycle) -> TransversalCycle {
        let mut members = vec![0; self.k_before];
        for (new, &old) in self.new_to_old.iter().enumerate() {
            members[old - 1] = cycle.members[new];
        }
        let kept_new = self.old_to_new(self.kept).expect("kept part survives");
        members[self.removed - 1] = self.mate[cycle.members[kept_new - 1]];
        TransversalCycle::new(members)
    }

    pub fn lift(&self, tiling: &Tiling) -> Tiling {
        Tiling::new(tiling.cycles.iter().map(|c| self.lift_cycle(c)).collect())
    }
}

/// Merges every `v ∈ V_part` with its partner `mate[v] ∈ V_{part+1}`.
///
/// The merged vertex keeps `v`'s neighbours in `V_{part-1}` and inherits the
/// partner's neighbours in `V_{part+2}`; part `part + 1` is deleted and the
/// survivors are renumbered in cyclic order starting from the lowest label.
pub fn collapse(
    g: &BlowupGraph,
    part: usize,
    mate: &[usize],
) -> Result<(BlowupGraph, CollapseMap), GeneratorError> {
    let k = g.k();
    let n = g.n();
    if k < 4 {
        return Err(GeneratorError::CollapseTooSmall(k));
    }
    if part == 0 || part > k {
        return Err(GraphError::PartOutOfRange { part, k }.into());
    }
    let bad = |reason: String| GeneratorError::BadMatching { part, reason };
    if mate.len() != n {
        return Err(bad(format!("expected {n} entries, got {}", mate.len())));
    }
    let removed = g.next(part);
    let mut used = vec![false; n];
    for (v, &f) in mate.iter().enumerate() {
        if f >= n || std::mem::replace(&mut used[f], true) {
            return Err(bad(format!(
                "partner {f} of {v} is out of range or repeated"
            )));
        }
        if !g.forward_row(part, v).contains(f) {
            return Err(bad(format!(
                "({part},{v}) is not adjacent to ({removed},{f})"
            )));
        }
    }
    let new_to_old: Vec<usize> = (1..=k).filter(|&p| p != removed).collect();
    let map = CollapseMap {
        k_before: k,
        kept: part,
        removed,
        mate: mate.to_vec(),
        new_to_old,
    };
    let new_of = |old: usize| map.old_to_new(old).expect("surviving part");
    let after = g.next(removed);
    let mut edges = Vec::new();
    for (p, u, w) in g.edges() {
        if p == part || p == removed {
            continue;
        }
        edges.push((new_of(p), u, w));
    }
    for (v, &f) in mate.iter().enumerate() {
        edges.extend(
            g.forward_row(removed, f)
                .ones()
                .map(|w| (new_of(part), v, w)),
        );
    }
    debug_assert_eq!(g.next(part), removed);
    debug_assert_eq!(wrap_new(k - 1, new_of(part)), new_of(after));
    let graph = BlowupGraph::new(k - 1, n, edges)?;
    Ok((graph, map))
}

fn wrap_new(k: usize, p: usize) -> usize {
    crate::graph::wrap_part(k, p as isize + 1)
}

/// `collapse` using the deterministic maximum matching of the pair.
pub fn collapse_with_max_matching(
    g: &BlowupGraph,
    part: usize,
) -> Result<(BlowupGraph, CollapseMap), GeneratorError> {
    match matching::perfect_matching(g, part)? {
        Some(mate) => collapse(g, part, &mate),
        None => Err(no_matching(g, part, part)),
    }
}

fn no_matching(g: &BlowupGraph, part: usize, label: usize) -> GeneratorError {
    let mut all = fixedbitset::FixedBitSet::with_capacity(g.n());
    all.insert_range(..);
    let violator = matching::hall_violator(g, part, &all, &all)
        .ok()
        .flatten()
        .unwrap_or_default();
    GeneratorError::NoPerfectMatching {
        pair: label,
        violator,
    }
}

/// Result of collapsing every small pair.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub graph: BlowupGraph,
    /// Original pair labels collapsed, in order.
    pub collapsed: Vec<usize>,
    pub steps: Vec<CollapseMap>,
}

impl Reduction {
    pub fn parts(&self) -> usize {
        self.graph.k()
    }

    /// Lifts a tiling of the reduced graph back to the original graph.
    pub fn lift(&self, tiling: &Tiling) -> Tiling {
        self.steps
            .iter()
            .rev()
            .fold(tiling.clone(), |t, step| step.lift(&t))
    }
}

/// Collapses, in increasing order, every pair `i` with `δ_i < (1+ε)n/2`.
pub fn reduce_small_deltas(g: &BlowupGraph, epsilon: f64) -> Result<Reduction, GeneratorError> {
    let profile = g.degree_profile();
    let threshold = (1.0 + epsilon) * g.n() as f64 / 2.0;
    let small: Vec<usize> = (1..=g.k())
        .filter(|&i| (profile.deltas[i - 1] as f64) < threshold)
        .collect();
    let mut graph = g.clone();
    // pair_label[p - 1]: original label of the pair leaving current part p
    let mut pair_label: Vec<usize> = (1..=g.k()).collect();
    let mut steps = Vec::new();
    for &target in &small {
        let p = pair_label
            .iter()
            .position(|&l| l == target)
            .expect("pair still present")
            + 1;
        if graph.k() < 4 {
            return Err(GeneratorError::CollapseTooSmall(graph.k()));
        }
        let mate =
            matching::perfect_matching(&graph, p)?.ok_or_else(|| no_matching(&graph, p, target))?;
        let (next, map) = collapse(&graph, p, &mate)?;
        let removed_label = pair_label[map.removed - 1];
        pair_label = map
            .new_to_old
            .iter()
            .map(|&old| {
                if old == p {
                    removed_label
                } else {
                    pair_label[old - 1]
                }
            })
            .collect();
        graph = next;
        steps.push(map);
    }
    Ok(Reduction {
        graph,
        collapsed: small,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate_tiling;

    #[test]
    fn complete_instances() {
        let g = complete_blowup(3, 1).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(
            complete_blowup(4, 2).unwrap().degree_profile().delta_star,
            2
        );
    }

    #[test]
    fn haggkvist_block_sizes() {
        let inst = haggkvist_example(3, 1).unwrap();
        assert_eq!(inst.graph.n(), 6);
        let p = &inst.partition;
        assert_eq!(p.block("U_1").len(), 2);
        assert_eq!(p.block("W_3").len(), 3);
        assert_eq!(p.block("Z_3").len(), 1);
        assert_eq!(p.union_of(&["Z_1", "Z_2", "Z_3"]).len(), 5);
        assert!(matches!(
            haggkvist_example(2, 1),
            Err(GeneratorError::BadExampleParameters { .. })
        ));
        assert!(haggkvist_example(3, 0).is_err());
    }

    #[test]
    fn haggkvist_degrees_by_hand() {
        let inst = haggkvist_example(3, 1).unwrap();
        let g = &inst.graph;
        let u2 = inst.partition.block("U_2")[0];
        assert_eq!(g.degree(u2, 3).unwrap(), 3);
        let z1 = inst.partition.block("Z_1")[0];
        assert_eq!(g.degree(z1, 2).unwrap(), 6);
        assert_eq!(g.degree_profile().delta_star, 3);
    }

    #[test]
    fn cover_example_at_seven_ninths() {
        let ex = cover_example(7, 9).unwrap();
        assert_eq!(ex.n, 36);
        assert_eq!(ex.epsilon, Rational64::new(1, 36));
        let p = &ex.instance.partition;
        let sizes: Vec<usize> = ["B_1", "A_1", "C_1", "B_0", "A_0", "C_0"]
            .iter()
            .map(|b| p.block(b).len())
            .collect();
        assert_eq!(sizes, vec![9, 8, 8, 9, 12, 12]);
        assert_eq!(ex.cover().len(), 33);
    }

    #[test]
    fn cover_example_rejects_gamma() {
        assert!(matches!(
            cover_example(3, 4),
            Err(GeneratorError::GammaOutOfRange(_))
        ));
        assert!(matches!(
            cover_example(4, 5),
            Err(GeneratorError::GammaOutOfRange(_))
        ));
    }

    #[test]
    fn random_extremes() {
        let g = random_min_degree(3, 5, &[5, 5, 5], 3).unwrap();
        assert_eq!(g, complete_blowup(3, 5).unwrap());
        let g = random_min_degree(4, 5, &[0; 4], 3).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(random_min_degree(3, 5, &[6, 1, 1], 0).is_err());
        assert!(random_min_degree(3, 5, &[1, 1], 0).is_err());
    }

    #[test]
    fn random_respects_lower_bounds() {
        let g = random_min_degree(3, 9, &[7, 6, 5], 1).unwrap();
        let prof = g.degree_profile();
        assert!(prof
            .deltas
            .iter()
            .zip([7, 6, 5])
            .all(|(&d, want)| d >= want));
        assert_eq!(g, random_min_degree(3, 9, &[7, 6, 5], 1).unwrap());
    }

    #[test]
    fn collapse_complete_gives_complete() {
        let g = complete_blowup(4, 3).unwrap();
        let (h, map) = collapse(&g, 2, &[2, 0, 1]).unwrap();
        assert_eq!(h, complete_blowup(3, 3).unwrap());
        let factor = Tiling::new((0..3).map(|j| TransversalCycle::new(vec![j; 3])).collect());
        let lifted = map.lift(&factor);
        assert!(validate_tiling(&g, &lifted).is_ok());
        assert_eq!(lifted.len(), 3);
    }

    #[test]
    fn collapse_wraps_around() {
        let g = random_min_degree(4, 5, &[4, 4, 4, 4], 9).unwrap();
        let (h, map) = collapse_with_max_matching(&g, 4).unwrap();
        assert_eq!(map.removed, 1);
        assert_eq!(map.new_to_old, vec![2, 3, 4]);
        assert_eq!(h.k(), 3);
    }

    #[test]
    fn collapse_rejects_bad_matchings() {
        let g = complete_blowup(3, 2).unwrap();
        assert!(matches!(
            collapse(&g, 1, &[0, 1]),
            Err(GeneratorError::CollapseTooSmall(3))
        ));
        let g = complete_blowup(4, 2).unwrap();
        assert!(collapse(&g, 1, &[0, 0]).is_err());
        let g = BlowupGraph::from_fn(4, 2, |p, u, w| p != 1 || u == w).unwrap();
        assert!(collapse(&g, 1, &[1, 0]).is_err());
        assert!(collapse(&g, 1, &[0, 1]).is_ok());
    }

    #[test]
    fn reduce_nothing_when_all_large() {
        let g = complete_blowup(4, 4).unwrap();
        let r = reduce_small_deltas(&g, 0.1).unwrap();
        assert_eq!(r.parts(), 4);
        assert!(r.collapsed.is_empty());
    }
}
