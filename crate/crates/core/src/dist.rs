//! Attribute-set size distributions.
//!
//! A [`SizeDistribution`] is the law `Q` of `|S(v)|`, a probability measure
//! on `{0, ..., M}`. The reduced measure `Q*` conditions on non-empty sets and
//! rescales the attribute ratio to `beta* = beta / (1 - Q(0))`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass accepted by [`make_distribution`].
pub const INPUT_MASS_TOLERANCE: f64 = 1e-9;

/// Named distribution families usable in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// All mass at a single size.
    Point { size: usize },
    /// `Bi(trials, p)` on `{0, ..., trials}`.
    Binomial { trials: usize, p: f64 },
    /// `q_t ∝ t^(-exponent)` on `{1, ..., max_size}`.
    PowerLaw { exponent: f64, max_size: usize },
    /// `q_t ∝ (1 - p)^(t - 1)` on `{1, ..., max_size}`.
    Geometric { p: f64, max_size: usize },
}

impl Family {
    pub fn build(&self) -> Result<SizeDistribution> {
        let masses = match *self {
            Family::Point { size } => {
                let mut m = vec![0.0; size + 1];
                m[size] = 1.0;
                m
            }
            Family::Binomial { trials, p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidFamily(format!("binomial p = {p}")));
                }
                binomial_masses(trials, p)
            }
            Family::PowerLaw { exponent, max_size } => {
                if !exponent.is_finite() || max_size == 0 {
                    return Err(Error::InvalidFamily(format!(
                        "power law exponent {exponent}, max_size {max_size}"
                    )));
                }
                std::iter::once(0.0)
                    .chain((1..=max_size).map(|t| (t as f64).powf(-exponent)))
                    .collect()
            }
            Family::Geometric { p, max_size } => {
                if !(p > 0.0 && p <= 1.0) || max_size == 0 {
                    return Err(Error::InvalidFamily(format!(
                        "geometric p = {p}, max_size {max_size}"
                    )));
                }
                std::iter::once(0.0)
                    .chain((1..=max_size).map(|t| (1.0 - p).powi(t as i32 - 1) * p))
                    .collect()
            }
        };
        let total: f64 = masses.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidFamily(format!("{self:?} has no usable mass")));
        }
        let masses = masses.into_iter().map(|q| q / total).collect();
        let mut dist = SizeDistribution::from_masses(masses)?;
        dist.family = Some(self.clone());
        Ok(dist)
    }
}

fn binomial_masses(trials: usize, p: f64) -> Vec<f64> {
    if p == 0.0 || p == 1.0 {
        let mut m = vec![0.0; trials + 1];
        m[if p == 0.0 { 0 } else { trials }] = 1.0;
        return m;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=trials).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    (0..=trials)
        .map(|k| {
            let ln_c = ln_fact[trials] - ln_fact[k] - ln_fact[trials - k];
            (ln_c + k as f64 * lp + (trials - k) as f64 * lq).exp()
        })
        .collect()
}

/// Probability measure `Q` on `{0, ..., max_size}`.
#[derive(Debug, Clone)]
pub struct SizeDistribution {
    mass: Vec<f64>,
    family: Option<Family>,
    sampler: WeightedIndex<f64>,
}

impl PartialEq for SizeDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.mass == other.mass
    }
}

impl SizeDistribution {
    /// Builds from a dense mass vector that is already normalized; trailing
    /// zeros are trimmed so that the last slot carries positive mass.
    pub(crate) fn from_masses(mut mass: Vec<f64>) -> Result<Self> {
        while mass.len() > 1 && mass.last() == Some(&0.0) {
            mass.pop();
        }
        if mass.is_empty() || mass.iter().all(|&q| q == 0.0) {
            return Err(Error::EmptyDistribution);
        }
        let sampler = WeightedIndex::new(&mass).map_err(|_| Error::EmptyDistribution)?;
        Ok(SizeDistribution {
            mass,
            family: None,
            sampler,
        })
    }

    pub fn point(size: usize) -> Self {
        Family::Point { size }
            .build()
            .expect("point mass is always valid")
    }

    /// Largest size with positive mass.
    pub fn max_size(&self) -> usize {
        self.mass.len() - 1
    }

    /// `q_t`, zero outside the support.
    pub fn mass(&self, t: usize) -> f64 {
        self.mass.get(t).copied().unwrap_or(0.0)
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn q0(&self) -> f64 {
        self.mass[0]
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    /// `(t, q_t)` for every `t` with `q_t > 0`.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &q)| q > 0.0)
            .map(|(t, &q)| (t, q))
    }

    pub fn first_moment(&self) -> f64 {
        self.support().map(|(t, q)| t as f64 * q).sum()
    }

    /// Limiting degree rate `a = beta^-1 * sum_t t q_t`.
    pub fn degree_rate(&self, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        Ok(self.first_moment() / beta)
    }

    /// Draws a set size `t` with probability `q_t`.
    pub fn sample_size<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }

    /// Conditions on non-empty sets: `Q*(t) = q_t / (1 - q_0)` and
    /// `beta* = beta / (1 - q_0)`.
    pub fn reduce(&self, beta: f64) -> Result<ReducedDistribution> {
        check_beta(beta)?;
        let q0 = self.q0();
        let keep = 1.0 - q0;
        if keep <= 0.0 {
            return Err(Error::DegenerateAtZero);
        }
        let mut star: Vec<f64> = self.mass.iter().map(|&q| q / keep).collect();
        star[0] = 0.0;
        Ok(ReducedDistribution {
            star: SizeDistribution::from_masses(star)?,
            beta_star: beta / keep,
            q0,
        })
    }

    /// Restricts to `{1, ..., max_size}` and renormalizes by
    /// `q_[M] = q_1 + ... + q_M`. Callers form `beta_M = beta / q_[M]`.
    pub fn truncate(&self, max_size: usize) -> Result<Truncation> {
        let upper = max_size.min(self.max_size());
        let kept: f64 = self.mass.iter().take(upper + 1).skip(1).sum();
        if kept <= 0.0 {
            return Err(Error::EmptyTruncation(max_size));
        }
        let mut mass = vec![0.0; upper + 1];
        for (t, slot) in mass.iter_mut().enumerate().skip(1) {
            *slot = self.mass[t] / kept;
        }
        Ok(Truncation {
            dist: SizeDistribution::from_masses(mass)?,
            kept_mass: kept,
        })
    }
}

/// Result of [`SizeDistribution::truncate`].
#[derive(Debug, Clone)]
pub struct Truncation {
    pub dist: SizeDistribution,
    /// `q_[M]`, the mass of `Q` on `{1, ..., M}`.
    pub kept_mass: f64,
}

impl Truncation {
    pub fn beta(&self, beta: f64) -> f64 {
        beta / self.kept_mass
    }
}

/// `Q*` together with `beta*` and the removed mass `q_0`.
#[derive(Debug, Clone)]
pub struct ReducedDistribution {
    pub star: SizeDistribution,
    pub beta_star: f64,
    pub q0: f64,
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidBeta(beta))
    }
}

/// Builds a distribution from explicit `(t, p)` pairs.
///
/// Duplicate sizes are rejected rather than merged. The total mass must be
/// within [`INPUT_MASS_TOLERANCE`] of one and is then renormalized.
pub fn make_distribution(pairs: &[(usize, f64)]) -> Result<SizeDistribution> {
    if pairs.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let max = pairs.iter().map(|&(t, _)| t).max().unwrap_or(0);
    let mut mass = vec![0.0; max + 1];
    let mut seen = vec![false; max + 1];
    for &(t, p) in pairs {
        if !(p >= 0.0 && p.is_finite()) {
            return Err(Error::InvalidMass { size: t, mass: p });
        }
        if std::mem::replace(&mut seen[t], true) {
            return Err(Error::DuplicateSupport(t));
        }
        mass[t] = p;
    }
    let total: f64 = mass.iter().sum();
    if (total - 1.0).abs() > INPUT_MASS_TOLERANCE {
        return Err(Error::NotNormalized(total));
    }
    SizeDistribution::from_masses(mass.into_iter().map(|p| p / total).collect())
}

/// Parses the inline `"t:p,t:p,..."` form used on the command line.
pub fn parse_pmf(text: &str) -> Result<SizeDistribution> {
    let pairs = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (t, p) = item
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("expected t:p, got {item:?}")))?;
            let t = t
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::Config(format!("bad size {t:?}: {e}")))?;
            let p = p
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad mass {p:?}: {e}")))?;
            Ok((t, p))
        })
        .collect::<Result<Vec<_>>>()?;
    make_distribution(&pairs)
}
