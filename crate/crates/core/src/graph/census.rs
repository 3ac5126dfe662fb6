use rayon::prelude::*;
use serde::Serialize;

use super::{DisjointSets, GraphSample};
use crate::dist::{check_beta, SizeDistribution};
use crate::error::{Error, Result};

/// Allowed deviation of a pmf's total mass from one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentCensus {
    /// Dense component id per vertex, numbered by smallest member.
    pub component_of: Vec<u32>,
    /// Size of each component, indexed by id.
    pub sizes: Vec<usize>,
    /// Order of the largest component.
    pub n1: usize,
    pub count: usize,
}

impl ComponentCensus {
    pub fn size_of(&self, v: usize) -> usize {
        self.sizes[self.component_of[v] as usize]
    }
}

/// Connected components via one union per attribute occupant: every
/// attribute's holders form a clique, so chaining them to the first holder
/// suffices. Vertices with empty sets stay singletons.
pub fn component_census(g: &GraphSample) -> ComponentCensus {
    let n = g.n();
    let mut dsu = DisjointSets::new(n);
    for w in 0..g.m() {
        if let Some((&first, rest)) = g.holders(w).split_first() {
            for &v in rest {
                dsu.union(first as usize, v as usize);
            }
        }
    }
    let mut id_of_root = vec![u32::MAX; n];
    let mut component_of = Vec::with_capacity(n);
    let mut sizes = Vec::new();
    for v in 0..n {
        let r = dsu.find(v);
        if id_of_root[r] == u32::MAX {
            id_of_root[r] = sizes.len() as u32;
            sizes.push(0);
        }
        let id = id_of_root[r];
        sizes[id as usize] += 1;
        component_of.push(id);
    }
    ComponentCensus {
        component_of,
        n1: sizes.iter().copied().max().unwrap_or(0),
        count: sizes.len(),
        sizes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeCensus {
    /// Number of vertices of each degree.
    pub counts: Vec<usize>,
    pub pmf: Vec<f64>,
    pub mean: f64,
}

impl DegreeCensus {
    pub fn max_degree(&self) -> usize {
        self.counts.len().saturating_sub(1)
    }

    /// Total variation distance to the limiting law for `(q, beta)`. The limit
    /// pmf is extended until its tail is below `1e-12`.
    pub fn tv_to_limit(&self, q: &SizeDistribution, beta: f64) -> Result<f64> {
        let mut kmax = self.max_degree().max(16);
        let law = loop {
            let law = limit_degree_pmf(q, beta, kmax)?;
            if law.tail < 1e-12 {
                break law;
            }
            kmax *= 2;
        };
        tv_distance(&self.pmf, &law.pmf)
    }
}

const DEGREE_CHUNK: usize = 4096;

/// Degree of every vertex, counting distinct neighbours across all shared
/// attributes.
pub fn degrees(g: &GraphSample) -> Vec<usize> {
    let n = g.n();
    let mut out = vec![0usize; n];
    out.par_chunks_mut(DEGREE_CHUNK).enumerate().for_each_init(
        || vec![u32::MAX; n],
        |stamp, (chunk, slots)| {
            for (i, slot) in slots.iter_mut().enumerate() {
                let v = chunk * DEGREE_CHUNK + i;
                let mut deg = 0;
                for &w in g.set(v) {
                    for &u in g.holders(w as usize) {
                        if u as usize != v && stamp[u as usize] != v as u32 {
                            stamp[u as usize] = v as u32;
                            deg += 1;
                        }
                    }
                }
                *slot = deg;
            }
        },
    );
    out
}

pub fn degree_census(g: &GraphSample) -> DegreeCensus {
    let degs = degrees(g);
    let max = degs.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0usize; max + 1];
    for d in degs {
        counts[d] += 1;
    }
    let n = g.n() as f64;
    let pmf: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let mean = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| k as f64 * c as f64)
        .sum::<f64>()
        / n;
    DegreeCensus { counts, pmf, mean }
}

/// Poisson probabilities `P(X = k)` for `k = 0..=kmax`, evaluated in log
/// space so that large means do not underflow.
pub fn poisson_pmf(lambda: f64, kmax: usize) -> Vec<f64> {
    if lambda == 0.0 {
        let mut p = vec![0.0; kmax + 1];
        p[0] = 1.0;
        return p;
    }
    let ln_l = lambda.ln();
    let mut ln_fact = 0.0;
    (0..=kmax)
        .map(|k| {
            if k > 0 {
                ln_fact += (k as f64).ln();
            }
            (k as f64 * ln_l - lambda - ln_fact).exp()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitDegreeLaw {
    pub rate: f64,
    pub pmf: Vec<f64>,
    /// Mass beyond `kmax`.
    pub tail: f64,
}

/// Mixed-Poisson limit of the degree law:
/// `p_k = sum_t q_t (a t)^k e^(-a t) / k!` with `a = beta^-1 sum_t t q_t`.
pub fn limit_degree_pmf(q: &SizeDistribution, beta: f64, kmax: usize) -> Result<LimitDegreeLaw> {
    check_beta(beta)?;
    let rate = q.first_moment() / beta;
    let mut pmf = vec![0.0; kmax + 1];
    for (t, qt) in q.support() {
        for (slot, p) in pmf.iter_mut().zip(poisson_pmf(rate * t as f64, kmax)) {
            *slot += qt * p;
        }
    }
    let tail = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
    Ok(LimitDegreeLaw { rate, pmf, tail })
}

/// `(1/2) sum_k |p_k - q_k|`, shorter input padded with zeros.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    for pmf in [p, q] {
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE || pmf.iter().any(|&x| x < 0.0) {
            return Err(Error::Unnormalized(total));
        }
    }
    let len = p.len().max(q.len());
    let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    let l1: f64 = (0..len).map(|k| (at(p, k) - at(q, k)).abs()).sum();
    Ok((0.5 * l1).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Multiplicity {
    /// `max_w f(w)`.
    pub max: usize,
    /// Number of attributes held by exactly `f` vertices, indexed by `f`.
    pub histogram: Vec<usize>,
    /// `2 M ln n`.
    pub bound: f64,
    pub bound_ok: bool,
}

/// Attribute occupancy `f(w)` against the high-probability bound
/// `max_w f(w) ≤ 2 M ln n`, with `M` the sample's size bound.
pub fn attribute_multiplicity(g: &GraphSample) -> Multiplicity {
    let max = (0..g.m()).map(|w| g.holders(w).len()).max().unwrap_or(0);
    let mut histogram = vec![0usize; max + 1];
    for w in 0..g.m() {
        histogram[g.holders(w).len()] += 1;
    }
    let bound = 2.0 * g.size_bound as f64 * (g.n() as f64).ln();
    Multiplicity {
        max,
        histogram,
        bound,
        bound_ok: max as f64 <= bound,
    }
}
