//! Random intersection graphs `G(n, m, Q)`.
//!
//! Vertex `v` owns a uniformly random attribute set `S(v)` whose size is
//! drawn from `Q` (or fixed per vertex, see [`sample_graph_fixed`]). Two
//! vertices are adjacent when their sets intersect. Adjacency is never
//! materialized: every consumer works from the attribute → vertices index.

mod census;
mod dsu;
mod dump;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dist::{check_beta, SizeDistribution};
use crate::error::{Error, Result};

pub use census::{
    attribute_multiplicity, component_census, degree_census, limit_degree_pmf, poisson_pmf,
    tv_distance, ComponentCensus, DegreeCensus, LimitDegreeLaw, Multiplicity,
    NORMALIZATION_TOLERANCE,
};
pub use dsu::DisjointSets;
pub use dump::{read_dump, write_dump, DumpHeader};

/// Vertex and attribute ids are stored as `u32`.
pub type Vertex = u32;
pub type Attribute = u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphParams {
    pub n: usize,
    pub m: usize,
    pub beta: f64,
}

impl GraphParams {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParams(format!("n = {n}, m = {m}")));
        }
        if n > u32::MAX as usize || m > u32::MAX as usize {
            return Err(Error::InvalidParams("n and m must fit in 32 bits".into()));
        }
        Ok(GraphParams {
            n,
            m,
            beta: m as f64 / n as f64,
        })
    }

    /// `m = ⌊beta n⌋`.
    pub fn from_beta(n: usize, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let m = (beta * n as f64).floor() as usize;
        let mut params = GraphParams::new(n, m)?;
        params.beta = beta;
        Ok(params)
    }
}

/// One realization: attribute sets in CSR form plus their transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    pub params: GraphParams,
    pub seed: u64,
    /// Upper bound `M` on set sizes used by the multiplicity check.
    pub size_bound: usize,
    set_offsets: Vec<usize>,
    set_attrs: Vec<Attribute>,
    index_offsets: Vec<usize>,
    index_vertices: Vec<Vertex>,
}

impl GraphSample {
    /// Assembles a sample from per-vertex sorted attribute lists.
    pub fn from_sets(
        params: GraphParams,
        seed: u64,
        size_bound: usize,
        sets: impl IntoIterator<Item = Vec<Attribute>>,
    ) -> Result<Self> {
        let mut set_offsets = Vec::with_capacity(params.n + 1);
        let mut set_attrs = Vec::new();
        set_offsets.push(0);
        for mut s in sets {
            s.sort_unstable();
            s.dedup();
            if s.last().is_some_and(|&w| w as usize >= params.m) {
                return Err(Error::InvalidParams(format!(
                    "attribute {} out of range for m = {}",
                    s.last().unwrap(),
                    params.m
                )));
            }
            set_attrs.extend_from_slice(&s);
            set_offsets.push(set_attrs.len());
        }
        if set_offsets.len() != params.n + 1 {
            return Err(Error::InvalidParams(format!(
                "{} sets supplied for n = {}",
                set_offsets.len() - 1,
                params.n
            )));
        }

        let mut index_offsets = vec![0usize; params.m + 1];
        for &w in &set_attrs {
            index_offsets[w as usize + 1] += 1;
        }
        for i in 0..params.m {
            index_offsets[i + 1] += index_offsets[i];
        }
        let mut cursor = index_offsets.clone();
        let mut index_vertices = vec![0 as Vertex; set_attrs.len()];
        for v in 0..params.n {
            for &w in &set_attrs[set_offsets[v]..set_offsets[v + 1]] {
                index_vertices[cursor[w as usize]] = v as Vertex;
                cursor[w as usize] += 1;
            }
        }
        Ok(GraphSample {
            params,
            seed,
            size_bound,
            set_offsets,
            set_attrs,
            index_offsets,
            index_vertices,
        })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn m(&self) -> usize {
        self.params.m
    }

    /// Sorted attribute set `S(v)`.
    pub fn set(&self, v: usize) -> &[Attribute] {
        &self.set_attrs[self.set_offsets[v]..self.set_offsets[v + 1]]
    }

    /// Sorted vertices holding attribute `w`; its length is `f(w)`.
    pub fn holders(&self, w: usize) -> &[Vertex] {
        &self.index_vertices[self.index_offsets[w]..self.index_offsets[w + 1]]
    }

    pub fn sets(&self) -> impl Iterator<Item = &[Attribute]> + '_ {
        (0..self.n()).map(|v| self.set(v))
    }

    /// `sum_v |S(v)|`, equal to `sum_w f(w)`.
    pub fn incidences(&self) -> usize {
        self.set_attrs.len()
    }

    /// Number of attributes shared by `u` and `v`.
    pub fn shared(&self, u: usize, v: usize) -> usize {
        let (a, b) = (self.set(u), self.set(v));
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    /// Sets rebuilt from the inverted index.
    pub fn transpose_sets(&self) -> Vec<Vec<Attribute>> {
        let mut sets = vec![Vec::new(); self.n()];
        for w in 0..self.m() {
            for &v in self.holders(w) {
                sets[v as usize].push(w as Attribute);
            }
        }
        sets
    }
}

fn uniform_subset(rng: &mut ChaCha8Rng, m: usize, t: usize) -> Vec<Attribute> {
    rand::seq::index::sample(rng, m, t)
        .into_iter()
        .map(|w| w as Attribute)
        .collect()
}

/// Samples `G(n, m, Q)`: each vertex draws `t ~ Q`, then a uniform `t`-subset
/// of the `m` attributes.
pub fn sample_graph(params: GraphParams, q: &SizeDistribution, seed: u64) -> Result<GraphSample> {
    if q.max_size() > params.m {
        return Err(Error::SizeExceedsAttributes {
            size: q.max_size(),
            m: params.m,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets: Vec<Vec<Attribute>> = (0..params.n)
        .map(|_| {
            let t = q.sample_size(&mut rng);
            uniform_subset(&mut rng, params.m, t)
        })
        .collect();
    GraphSample::from_sets(params, seed, q.max_size(), sets)
}

/// Samples `G_s(n, m)` with exactly `counts[t]` vertices of set size `t`,
/// assigned to vertices in random order.
pub fn sample_graph_fixed(
    params: GraphParams,
    counts: &BTreeMap<usize, usize>,
    seed: u64,
) -> Result<GraphSample> {
    let total: usize = counts.values().sum();
    if total != params.n {
        return Err(Error::CountMismatch {
            got: total,
            n: params.n,
        });
    }
    let size_bound = counts
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(&t, _)| t)
        .max()
        .unwrap_or(0);
    if size_bound > params.m {
        return Err(Error::SizeExceedsAttributes {
            size: size_bound,
            m: params.m,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes: Vec<usize> = counts
        .iter()
        .flat_map(|(&t, &c)| std::iter::repeat_n(t, c))
        .collect();
    sizes.shuffle(&mut rng);
    let sets: Vec<Vec<Attribute>> = sizes
        .into_iter()
        .map(|t| uniform_subset(&mut rng, params.m, t))
        .collect();
    GraphSample::from_sets(params, seed, size_bound, sets)
}
