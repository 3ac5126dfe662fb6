//! Naive reference implementations shared by the integration targets.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use rig_giant_core::graph::GraphSample;
use rig_giant_core::{make_distribution, SizeDistribution};

/// Explicit adjacency lists by pairwise set intersection.
pub fn adjacency(g: &GraphSample) -> Vec<Vec<usize>> {
    let sets: Vec<BTreeSet<u32>> = g.sets().map(|s| s.iter().copied().collect()).collect();
    (0..g.n())
        .map(|u| {
            (0..g.n())
                .filter(|&v| v != u && !sets[u].is_disjoint(&sets[v]))
                .collect()
        })
        .collect()
}

/// Component label per vertex, by BFS.
pub fn bfs_components(adj: &[Vec<usize>]) -> Vec<usize> {
    let mut comp = vec![usize::MAX; adj.len()];
    let mut next = 0;
    for s in 0..adj.len() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Up to four support points below 8, random weights.
pub fn random_q<R: Rng>(rng: &mut R) -> SizeDistribution {
    let support = rng.random_range(1..=4);
    let pairs: Vec<(usize, f64)> = (0..support)
        .map(|i| (i * 2 + rng.random_range(0..2), rng.random_range(0.1..1.0)))
        .collect();
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    make_distribution(
        &pairs
            .iter()
            .map(|&(t, p)| (t, p / total))
            .collect::<Vec<_>>(),
    )
    .unwrap()
}
