//! Exact searches checked against brute-force enumerations written here.

use ckblowup::exact::{
    cover_number, enumerate_linking, is_cover, linking_sequences, max_tiling, Budget,
};
use ckblowup::matching::{hall_violator, max_matching};
use ckblowup::{validate_tiling, BlowupGraph, VertexRef};
use fixedbitset::FixedBitSet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(k: usize, n: usize, density: f64, seed: u64) -> BlowupGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize, usize)> = (1..=k)
        .flat_map(|p| (0..n).flat_map(move |u| (0..n).map(move |w| (p, u, w))))
        .filter(|_| rng.gen_bool(density))
        .collect();
    BlowupGraph::new(k, n, edges).unwrap()
}

fn triangles(g: &BlowupGraph) -> Vec<[usize; 3]> {
    let n = g.n();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let (x, y, z) = (
                    VertexRef::new(1, a),
                    VertexRef::new(2, b),
                    VertexRef::new(3, c),
                );
                if g.adjacent(x, y) && g.adjacent(y, z) && g.adjacent(z, x) {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

fn brute_packing(tris: &[[usize; 3]], used: &mut [u32; 3], from: usize) -> usize {
    let mut best = 0;
    for i in from..tris.len() {
        let t = tris[i];
        if (0..3).all(|p| used[p] & (1 << t[p]) == 0) {
            (0..3).for_each(|p| used[p] |= 1 << t[p]);
            best = best.max(1 + brute_packing(tris, used, i + 1));
            (0..3).for_each(|p| used[p] &= !(1 << t[p]));
        }
    }
    best
}

fn brute_cover(g: &BlowupGraph) -> usize {
    let tris = triangles(g);
    let n = g.n();
    let bits = 3 * n;
    (0u32..1 << bits)
        .filter(|mask| {
            tris.iter()
                .all(|t| (0..3).any(|p| mask & (1 << (p * n + t[p])) != 0))
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

fn brute_matching(adj: &[Vec<bool>]) -> usize {
    let right = adj.first().map_or(0, Vec::len);
    // best[mask] = largest matching of the first i left vertices using right set `mask`
    let mut best = vec![0usize; 1 << right];
    for row in adj {
        let prev = best.clone();
        for mask in 0..1usize << right {
            for (w, &e) in row.iter().enumerate() {
                if e && mask & (1 << w) == 0 {
                    let m = mask | 1 << w;
                    best[m] = best[m].max(prev[mask] + 1);
                }
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn max_tiling_matches_brute_force(n in 1usize..=5, density in 0.3f64..0.95, seed in any::<u64>()) {
        let g = random_graph(3, n, density, seed);
        let r = max_tiling(&g, Budget::unlimited());
        prop_assert!(r.optimal);
        prop_assert!(validate_tiling(&g, &r.witness).is_ok());
        prop_assert_eq!(r.witness.len(), r.size);
        prop_assert_eq!(r.size, brute_packing(&triangles(&g), &mut [0; 3], 0));
    }

    #[test]
    fn cover_number_matches_brute_force(n in 1usize..=4, density in 0.3f64..0.95, seed in any::<u64>()) {
        let g = random_graph(3, n, density, seed);
        let r = cover_number(&g, None, Budget::unlimited());
        prop_assert!(r.optimal);
        prop_assert!(is_cover(&g, &r.witness));
        prop_assert_eq!(r.size, r.witness.len());
        prop_assert_eq!(r.size, brute_cover(&g));
    }

    #[test]
    fn matching_matches_brute_force(n in 1usize..=8, density in 0.1f64..0.9, seed in any::<u64>(), drop in any::<u8>()) {
        let g = random_graph(3, n, density, seed);
        let mut left = FixedBitSet::with_capacity(n);
        left.insert_range(..);
        let mut right = left.clone();
        // drop one vertex from each side for an unbalanced view
        if drop % 3 == 1 {
            left.set(drop as usize % n, false);
            right.set((drop as usize / 3) % n, false);
        }
        let m = max_matching(&g, 2, &left, &right).unwrap();
        for (i, &(u, w)) in m.iter().enumerate() {
            prop_assert!(left.contains(u) && right.contains(w));
            prop_assert!(g.adjacent(VertexRef::new(2, u), VertexRef::new(3, w)));
            prop_assert!(m[i + 1..].iter().all(|&(a, b)| a != u && b != w));
        }
        let adj: Vec<Vec<bool>> = left
            .ones()
            .map(|u| right.ones().map(|w| g.adjacent(VertexRef::new(2, u), VertexRef::new(3, w))).collect())
            .collect();
        prop_assert_eq!(m.len(), brute_matching(&adj));
        if left.count_ones(..) == right.count_ones(..) {
            let violator = hall_violator(&g, 2, &left, &right).unwrap();
            prop_assert_eq!(violator.is_none(), m.len() == left.count_ones(..));
            if let Some(s) = violator {
                let mut nbrs = FixedBitSet::with_capacity(n);
                for &u in &s {
                    for w in right.ones() {
                        if g.adjacent(VertexRef::new(2, u), VertexRef::new(3, w)) {
                            nbrs.insert(w);
                        }
                    }
                }
                prop_assert!(nbrs.count_ones(..) < s.len());
            }
        }
    }

    #[test]
    fn short_linking_counts_are_common_triangle_pairs(n in 1usize..=5, density in 0.4f64..1.0, seed in any::<u64>(), a in 0usize..5, b in 0usize..5) {
        let g = random_graph(3, n, density, seed);
        let (v, w) = (VertexRef::new(1, a % n), VertexRef::new(1, b % n));
        // t = 2: (x, y) ∈ V_2 × V_3 with both vxy and wxy triangles
        let mut expected = 0u64;
        for x in 0..n {
            for y in 0..n {
                let (x, y) = (VertexRef::new(2, x), VertexRef::new(3, y));
                if g.adjacent(x, y) && [v, w].iter().all(|&e| g.adjacent(e, x) && g.adjacent(e, y)) {
                    expected += 1;
                }
            }
        }
        prop_assert_eq!(enumerate_linking(&g, v, w, 2, None).unwrap(), expected);
        prop_assert_eq!(linking_sequences(&g, v, w, 2).unwrap().len() as u64, expected);
    }
}

#[test]
fn longer_linking_count_agrees_with_listing() {
    for seed in 0..6 {
        let g = random_graph(3, 4, 0.8, seed);
        let (v, w) = (VertexRef::new(2, 0), VertexRef::new(2, 3));
        let listed = linking_sequences(&g, v, w, 5).unwrap();
        assert_eq!(
            enumerate_linking(&g, v, w, 5, None).unwrap(),
            listed.len() as u64
        );
        // every listed sequence follows the cyclic part pattern from V_3
        for s in &listed {
            let parts: Vec<usize> = s.iter().map(|x| x.part).collect();
            assert_eq!(parts, vec![3, 1, 2, 3, 1]);
        }
    }
}

#[test]
fn complete_blowup_linking_counts() {
    let g = ckblowup::generators::complete_blowup(3, 4).unwrap();
    let (v, w) = (VertexRef::new(1, 0), VertexRef::new(1, 1));
    assert_eq!(enumerate_linking(&g, v, w, 2, None).unwrap(), 16);
    let g = ckblowup::generators::complete_blowup(4, 3).unwrap();
    assert_eq!(
        enumerate_linking(&g, VertexRef::new(1, 0), VertexRef::new(1, 2), 3, None).unwrap(),
        27
    );
}
