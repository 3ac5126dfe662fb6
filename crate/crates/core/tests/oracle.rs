//! Small-scale cross-checks against naive implementations.

mod common;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rig_giant_core::explore::{big_vertex_census, ExplorationConfig, Explorer, Mode};
use rig_giant_core::graph::{component_census, degree_census, sample_graph, GraphParams};
use rig_giant_core::SizeDistribution;

use common::{adjacency, bfs_components, random_q};

#[test]
fn union_find_matches_bfs_and_degrees_match_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for sample in 0..100 {
        let n = rng.random_range(1..=500);
        let q = random_q(&mut rng);
        let m = rng.random_range(q.max_size().max(1)..=(2 * n).max(q.max_size().max(1)));
        let g = sample_graph(GraphParams::new(n, m).unwrap(), &q, sample).unwrap();
        let adj = adjacency(&g);

        let census = component_census(&g);
        let bfs = bfs_components(&adj);
        for u in 0..n {
            for v in (u + 1)..n {
                assert_eq!(
                    census.component_of[u] == census.component_of[v],
                    bfs[u] == bfs[v],
                    "sample {sample}: ({u}, {v})"
                );
            }
        }
        let mut sizes = vec![0usize; n];
        bfs.iter().for_each(|&c| sizes[c] += 1);
        assert_eq!(census.n1, *sizes.iter().max().unwrap());
        assert_eq!(census.count, sizes.iter().filter(|&&s| s > 0).count());

        let edges: usize = adj.iter().map(Vec::len).sum::<usize>() / 2;
        let deg = degree_census(&g);
        assert!((deg.mean - 2.0 * edges as f64 / n as f64).abs() < 1e-12);
        for (u, nb) in adj.iter().enumerate() {
            assert!(!g.set(u).is_empty() || nb.is_empty());
        }
    }
}

#[test]
fn full_exploration_is_big_iff_component_reaches_omega() {
    let q = SizeDistribution::point(2);
    for (n, seed) in [(400, 1), (2000, 2), (5000, 3)] {
        let g = sample_graph(GraphParams::from_beta(n, 1.0).unwrap(), &q, seed).unwrap();
        let cc = component_census(&g);
        for omega in [2, 5, 9, 30] {
            let census = big_vertex_census(&g, omega, Some(3 * omega)).unwrap();
            for v in 0..n {
                assert_eq!(
                    census.big_full[v],
                    cc.size_of(v) >= omega,
                    "n={n} omega={omega} v={v}"
                );
                assert!(!census.big_simple[v] || census.big_full[v]);
                assert!(!census.big_regular[v] || census.big_full[v]);
            }
        }
    }
}

#[test]
fn exploration_invariants_on_random_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for sample in 0..30 {
        let n = rng.random_range(20..=300);
        let q = random_q(&mut rng);
        let m = rng.random_range(q.max_size().max(1)..=2 * n);
        let g = sample_graph(GraphParams::new(n, m).unwrap(), &q, sample).unwrap();
        let mut ex = Explorer::new(&g);
        for mode in Mode::ALL {
            let cfg = ExplorationConfig::new(mode, 2 + sample as usize % 8);
            for v in 0..n {
                let r = ex.explore(&g, v, &cfg);
                assert_eq!(r.list[0] as usize, v);
                let distinct: BTreeSet<_> = r.list.iter().collect();
                assert_eq!(distinct.len(), r.list.len());
                let used: BTreeSet<u32> = r
                    .list
                    .iter()
                    .flat_map(|&u| g.set(u as usize).iter().copied())
                    .collect();
                assert_eq!(r.used_attributes, used.into_iter().collect::<Vec<_>>());
                assert_eq!(r.is_big, r.list.len() >= cfg.omega);
                assert!(r.list.len() <= r.colored);
                if mode != Mode::Simple {
                    assert!(r.complex_count.is_empty());
                }
                assert_eq!(r, ex.explore(&g, v, &cfg));
            }
        }
    }
}

#[test]
fn irregular_roots_scale_with_omega() {
    // Calibrated: the worst of five seeds stayed below 1.2 omega at both sizes.
    const C: f64 = 3.0;
    let q = SizeDistribution::point(2);
    for n in [1_000, 10_000] {
        let omega = ((n as f64).ln().ceil()) as usize;
        let mut worst = 0;
        for seed in 0..5 {
            let g = sample_graph(GraphParams::from_beta(n, 1.0).unwrap(), &q, seed).unwrap();
            let census = big_vertex_census(&g, omega, Some(3 * omega)).unwrap();
            worst = worst.max(census.irregular_roots);
        }
        assert!(worst as f64 <= C * omega as f64, "n={n}: {worst}");
    }
}
