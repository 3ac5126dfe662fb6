//! Multi-type Poisson branching process behind the giant-component limit.
//!
//! A particle of type `s` has `Poisson(λ(s, t))` children of type `t`, with
//! `λ(s, t) = (s - 1) c_t` and `c_t = t q_t / beta`. Because the mean matrix
//! is rank one in `s - 1`, the extinction probabilities take the form
//! `x_t = exp(-(t - 1) θ)` where `θ` is the smallest non-negative root of
//!
//! ```text
//! θ = sum_t c_t (1 - exp(-(t - 1) θ))
//! ```
//!
//! [`solve_extinction`] solves this scalar equation; [`solve_extinction_vector`]
//! iterates the full per-type system and serves as a cross-check.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{check_beta, SizeDistribution};
use crate::error::{Error, Result};
use crate::seed;

/// Permitted gap between the two prediction routes.
pub const ROUTE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffspringKernel {
    pub beta: f64,
    /// `(t, c_t)` for every type with positive mass, ascending in `t`.
    rates: Vec<(usize, f64)>,
}

impl OffspringKernel {
    /// Kernel driven by a measure on `{1, 2, ...}`.
    pub fn build(q: &SizeDistribution, beta: f64) -> Result<Self> {
        if q.q0() > 0.0 {
            return Err(Error::MassAtZero);
        }
        Self::from_restriction(q, beta)
    }

    /// Kernel from the masses of `q` on `{1, 2, ...}` without renormalizing;
    /// mass at zero is ignored.
    pub fn from_restriction(q: &SizeDistribution, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let rates = q
            .support()
            .filter(|&(t, _)| t >= 1)
            .map(|(t, qt)| (t, t as f64 * qt / beta))
            .collect();
        Ok(OffspringKernel { beta, rates })
    }

    pub fn rates(&self) -> &[(usize, f64)] {
        &self.rates
    }

    pub fn types(&self) -> impl Iterator<Item = usize> + '_ {
        self.rates.iter().map(|&(t, _)| t)
    }

    /// `c_t`, zero off the support.
    pub fn rate(&self, t: usize) -> f64 {
        self.rates
            .iter()
            .find(|&&(s, _)| s == t)
            .map_or(0.0, |&(_, c)| c)
    }

    /// Mean number of type-`t` children of a type-`s` particle.
    pub fn mean(&self, s: usize, t: usize) -> f64 {
        s.saturating_sub(1) as f64 * self.rate(t)
    }

    pub fn max_type(&self) -> usize {
        self.rates.last().map_or(0, |&(t, _)| t)
    }

    /// Slope of the fixed-point map at zero, `sum_t c_t (t - 1)`. The process
    /// survives with positive probability exactly when this exceeds one.
    pub fn criticality(&self) -> f64 {
        self.rates.iter().map(|&(t, c)| c * (t - 1) as f64).sum()
    }

    fn fixed_point_map(&self, theta: f64) -> f64 {
        self.rates
            .iter()
            .map(|&(t, c)| -c * (-((t - 1) as f64) * theta).exp_m1())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            max_iter: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalSolution {
    /// Smallest non-negative fixed point.
    pub theta: f64,
    /// Limit of the iteration started above the root; equals `theta` within
    /// tolerance when converged.
    pub theta_upper: f64,
    /// `(t, x_t)` over the kernel's types.
    pub extinct: Vec<(usize, f64)>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl SurvivalSolution {
    pub fn extinction(&self, s: usize) -> f64 {
        (-(s.saturating_sub(1) as f64) * self.theta).exp()
    }

    /// `ρ(s) = 1 - exp(-(s - 1) θ)`.
    pub fn survival(&self, s: usize) -> f64 {
        -(-(s.saturating_sub(1) as f64) * self.theta).exp_m1()
    }

    /// `(s, ρ(s))` for `s = 1..=max_type + 1`.
    pub fn survival_table(&self) -> Vec<(usize, f64)> {
        let top = self.extinct.last().map_or(1, |&(t, _)| t + 1);
        (1..=top).map(|s| (s, self.survival(s))).collect()
    }
}

/// Solves the scalar extinction equation by monotone iteration from both
/// sides of the root. Subcritical and critical kernels return `θ = 0`.
pub fn solve_extinction(kernel: &OffspringKernel, opts: SolverOptions) -> SurvivalSolution {
    let finish = |theta: f64, theta_upper: f64, iterations: usize, converged: bool| {
        let residual = (kernel.fixed_point_map(theta) - theta).abs();
        SurvivalSolution {
            theta,
            theta_upper,
            extinct: kernel
                .types()
                .map(|t| (t, (-((t - 1) as f64) * theta).exp()))
                .collect(),
            iterations,
            residual,
            converged,
        }
    };

    let slope = kernel.criticality();
    if slope <= 1.0 {
        return finish(0.0, 0.0, 0, true);
    }

    // The map is concave, increasing and bounded by sum c_t ≤ slope, so
    // `slope` lies above the root and any point where the map exceeds the
    // identity lies below it.
    let mut hi = slope;
    let mut lo = slope / 2.0;
    while kernel.fixed_point_map(lo) <= lo {
        lo /= 2.0;
    }

    let mut iterations = 0;
    while hi - lo > opts.tol {
        if iterations >= opts.max_iter {
            log::warn!(
                "extinction solver stopped after {iterations} iterations, gap {:e}",
                hi - lo
            );
            return finish(lo, hi, iterations, false);
        }
        lo = kernel.fixed_point_map(lo);
        hi = kernel.fixed_point_map(hi);
        iterations += 1;
    }
    finish(lo, hi, iterations, true)
}

/// Generic iteration `x_s <- exp(-sum_t λ(s,t) (1 - x_t))` from `x = 0`,
/// without using the rank-one structure.
pub fn solve_extinction_vector(kernel: &OffspringKernel, opts: SolverOptions) -> Vec<(usize, f64)> {
    let types: Vec<usize> = kernel.types().collect();
    let lambda: Vec<Vec<f64>> = types
        .iter()
        .map(|&s| types.iter().map(|&t| kernel.mean(s, t)).collect())
        .collect();
    let mut x = vec![0.0; types.len()];
    for _ in 0..opts.max_iter {
        let next: Vec<f64> = lambda
            .iter()
            .map(|row| {
                let load: f64 = row.iter().zip(&x).map(|(l, xt)| l * (1.0 - xt)).sum();
                (-load).exp()
            })
            .collect();
        let change = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = next;
        if change <= opts.tol * 1e-3 {
            break;
        }
    }
    types.into_iter().zip(x).collect()
}

/// `ρ̃ = sum_t q_t ρ(t + 1)` for the measure the solution was computed on.
pub fn rho_tilde(sol: &SurvivalSolution, q: &SizeDistribution) -> Result<f64> {
    if q.q0() > 0.0 {
        return Err(Error::SupportMismatch("measure has mass at size 0".into()));
    }
    let mut total = 0.0;
    for (t, qt) in q.support() {
        if !sol.extinct.iter().any(|&(s, _)| s == t) {
            return Err(Error::SupportMismatch(format!(
                "size {t} is not a type of the solved kernel"
            )));
        }
        total += qt * sol.survival(t + 1);
    }
    // Masses summing to 1 + ulp can push a near-certain survival past 1.
    Ok(total.min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GiantPrediction {
    /// `(1 - q_0) ρ̃_{Q*, beta*}`, the limiting `N_1 / n`.
    pub fraction: f64,
    /// `sum_{t≥1} q_t ρ(t + 1)` with the kernel built on `Q` directly.
    pub direct: f64,
    pub route_gap: f64,
    pub q0: f64,
    pub beta_star: Option<f64>,
    pub rho_tilde: f64,
    pub solution: SurvivalSolution,
}

/// Limiting giant fraction for `G(n, ⌊beta n⌋, Q)`.
pub fn predict_giant_fraction(q: &SizeDistribution, beta: f64) -> Result<GiantPrediction> {
    predict_with(q, beta, SolverOptions::default())
}

pub fn predict_with(
    q: &SizeDistribution,
    beta: f64,
    opts: SolverOptions,
) -> Result<GiantPrediction> {
    check_beta(beta)?;
    let reduced = match q.reduce(beta) {
        Ok(r) => r,
        Err(Error::DegenerateAtZero) => {
            let empty = solve_extinction(&OffspringKernel::from_restriction(q, beta)?, opts);
            return Ok(GiantPrediction {
                fraction: 0.0,
                direct: 0.0,
                route_gap: 0.0,
                q0: 1.0,
                beta_star: None,
                rho_tilde: 0.0,
                solution: empty,
            });
        }
        Err(e) => return Err(e),
    };
    let kernel = OffspringKernel::build(&reduced.star, reduced.beta_star)?;
    let solution = solve_extinction(&kernel, opts);
    let rho = rho_tilde(&solution, &reduced.star)?;
    let fraction = (1.0 - reduced.q0) * rho;

    let direct_kernel = OffspringKernel::from_restriction(q, beta)?;
    let direct_solution = solve_extinction(&direct_kernel, opts);
    let direct: f64 = q
        .support()
        .filter(|&(t, _)| t >= 1)
        .map(|(t, qt)| qt * direct_solution.survival(t + 1))
        .sum();
    let route_gap = (fraction - direct).abs();
    if route_gap > ROUTE_TOLERANCE {
        log::warn!("prediction routes differ by {route_gap:e}");
    }
    Ok(GiantPrediction {
        fraction,
        direct,
        route_gap,
        q0: reduced.q0,
        beta_star: Some(reduced.beta_star),
        rho_tilde: rho,
        solution,
    })
}

/// Exact Poisson draw: inversion for small means, `rand_distr` otherwise.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < 10.0 {
        let u: f64 = rng.random();
        let mut p = (-mean).exp();
        let mut cdf = p;
        let mut k = 0u64;
        while u > cdf && k < 1000 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        k
    } else {
        Poisson::new(mean)
            .expect("finite positive mean")
            .sample(rng) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Progeny {
    Finite(u64),
    /// Total progeny reached the cap.
    Capped,
}

/// Breadth-first simulation of the process from one particle of type `root`,
/// stopped as soon as the total progeny reaches `cap`.
pub fn simulate_progeny<R: Rng + ?Sized>(
    kernel: &OffspringKernel,
    root: usize,
    cap: u64,
    rng: &mut R,
) -> Progeny {
    let mut total = 1u64;
    if total >= cap {
        return Progeny::Capped;
    }
    let mut queue = VecDeque::from([root]);
    while let Some(s) = queue.pop_front() {
        if s <= 1 {
            continue;
        }
        let factor = (s - 1) as f64;
        for &(t, c) in kernel.rates() {
            for _ in 0..sample_poisson(rng, factor * c) {
                total += 1;
                if total >= cap {
                    return Progeny::Capped;
                }
                queue.push_back(t);
            }
        }
    }
    Progeny::Finite(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalEstimate {
    /// Fraction of replicates whose progeny reached the cap.
    pub estimate: f64,
    pub stderr: f64,
    pub capped: u64,
    pub reps: u64,
}

/// Monte Carlo estimate of `P(|X(root)| ≥ cap)`.
///
/// Replicate `i` draws from its own stream derived from `(seed, i)`, so runs
/// with different caps share sample paths and the estimates are monotone in
/// the cap.
pub fn survival_mc(
    kernel: &OffspringKernel,
    root: usize,
    cap: u64,
    reps: u64,
    seed: u64,
) -> SurvivalEstimate {
    let capped = (0..reps)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = seed::stream(seed, i);
            simulate_progeny(kernel, root, cap, &mut rng) == Progeny::Capped
        })
        .count() as u64;
    let p = capped as f64 / reps.max(1) as f64;
    SurvivalEstimate {
        estimate: p,
        stderr: (p * (1.0 - p) / reps.max(1) as f64).sqrt(),
        capped,
        reps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::make_distribution;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Plain bisection on `g(θ) = F(θ) - θ` over `(lo, hi)`, where the root is
    /// bracketed; independent of the solver's iteration.
    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) - mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn kernel_examples() {
        let k = OffspringKernel::build(&SizeDistribution::point(2), 1.0).unwrap();
        assert_eq!(k.rate(2), 2.0);
        assert_eq!(k.mean(3, 2), 4.0);
        assert_eq!(k.mean(1, 2), 0.0);

        let k = OffspringKernel::build(&SizeDistribution::point(1), 3.0).unwrap();
        assert_eq!(k.rate(1), 1.0 / 3.0);
        assert_eq!(k.mean(1, 1), 0.0);

        let k = OffspringKernel::build(&SizeDistribution::point(3), 2.0).unwrap();
        assert_eq!(k.rate(3), 1.5);

        let q = make_distribution(&[(0, 0.5), (3, 0.5)]).unwrap();
        assert!(matches!(
            OffspringKernel::build(&q, 1.0),
            Err(Error::MassAtZero)
        ));
        assert!(OffspringKernel::build(&SizeDistribution::point(2), 0.0).is_err());
    }

    #[test]
    fn solve_point_two() {
        let k = OffspringKernel::build(&SizeDistribution::point(2), 1.0).unwrap();
        let sol = solve_extinction(&k, SolverOptions::default());
        let oracle = bisect(|th| 2.0 * (1.0 - (-th).exp()), 0.5, 2.0);
        assert!((sol.theta - oracle).abs() < 1e-12);
        assert!((sol.theta - 1.5936).abs() < 1e-4);
        assert!((sol.extinct[0].1 - 0.2032).abs() < 1e-4);
        assert!((sol.survival(3) - 0.9587).abs() < 1e-4);
        assert!(sol.converged && sol.residual < 1e-12);
        assert!((sol.theta_upper - sol.theta).abs() <= 1e-12);
    }

    #[test]
    fn subcritical_and_sterile() {
        let k = OffspringKernel::build(&SizeDistribution::point(2), 4.0).unwrap();
        let sol = solve_extinction(&k, SolverOptions::default());
        assert_eq!(sol.theta, 0.0);
        assert!(sol.survival_table().iter().all(|&(_, r)| r == 0.0));

        for beta in [0.1, 1.0, 10.0] {
            let k = OffspringKernel::build(&SizeDistribution::point(1), beta).unwrap();
            let sol = solve_extinction(&k, SolverOptions::default());
            assert_eq!(sol.theta, 0.0);
        }
    }

    #[test]
    fn rho_tilde_examples() {
        let q = SizeDistribution::point(2);
        let sol = solve_extinction(
            &OffspringKernel::build(&q, 1.0).unwrap(),
            Default::default(),
        );
        assert!((rho_tilde(&sol, &q).unwrap() - 0.9587).abs() < 1e-4);

        let q = SizeDistribution::point(3);
        let sol = solve_extinction(
            &OffspringKernel::build(&q, 1.0).unwrap(),
            Default::default(),
        );
        let oracle = bisect(|th| 3.0 * (1.0 - (-2.0 * th).exp()), 1.0, 4.0);
        assert!((sol.theta - oracle).abs() < 1e-12);
        assert!((sol.theta - 2.99245).abs() < 1e-5);
        let rho = rho_tilde(&sol, &q).unwrap();
        assert!((rho - (1.0 - (-3.0 * oracle).exp())).abs() < 1e-12);
        assert!((rho - 0.99987).abs() < 1e-5);

        let q = SizeDistribution::point(2);
        let sol = solve_extinction(
            &OffspringKernel::build(&q, 4.0).unwrap(),
            Default::default(),
        );
        assert_eq!(rho_tilde(&sol, &q).unwrap(), 0.0);

        assert!(rho_tilde(&sol, &SizeDistribution::point(5)).is_err());
    }

    #[test]
    fn prediction_examples() {
        let p = predict_giant_fraction(&SizeDistribution::point(2), 1.0).unwrap();
        assert!((p.fraction - 0.9587).abs() < 1e-4);

        let q = make_distribution(&[(0, 0.5), (3, 0.5)]).unwrap();
        let p = predict_giant_fraction(&q, 1.0).unwrap();
        let theta = bisect(|th| 1.5 * (1.0 - (-2.0 * th).exp()), 0.5, 3.0);
        assert!((theta - 1.41072).abs() < 1e-5);
        let expect = 0.5 * (1.0 - (-3.0 * theta).exp());
        assert!((p.fraction - expect).abs() < 1e-12);
        assert!((p.fraction - 0.4927).abs() < 1e-4);
        assert!(p.route_gap <= ROUTE_TOLERANCE);
        assert_eq!(p.beta_star, Some(2.0));

        let p = predict_giant_fraction(&SizeDistribution::point(0), 1.0).unwrap();
        assert_eq!(p.fraction, 0.0);
    }

    #[test]
    fn vector_iteration_matches_scalar() {
        let q = make_distribution(&[(1, 0.2), (2, 0.3), (4, 0.4), (7, 0.1)]).unwrap();
        let k = OffspringKernel::build(&q, 1.3).unwrap();
        let sol = solve_extinction(&k, Default::default());
        let vec = solve_extinction_vector(&k, Default::default());
        for (&(s, a), &(t, b)) in sol.extinct.iter().zip(&vec) {
            assert_eq!(s, t);
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn poisson_sampler_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for mean in [0.3, 4.0, 9.5, 25.0] {
            let draws = 200_000;
            let xs: Vec<f64> = (0..draws)
                .map(|_| sample_poisson(&mut rng, mean) as f64)
                .collect();
            let m = xs.iter().sum::<f64>() / draws as f64;
            let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / draws as f64;
            let se = (mean / draws as f64).sqrt();
            assert!((m - mean).abs() < 5.0 * se, "mean {mean}: {m}");
            assert!((v / mean - 1.0).abs() < 0.03, "var {mean}: {v}");
        }
        assert_eq!(sample_poisson(&mut rng, 0.0), 0);
    }

    #[test]
    fn sterile_root_has_single_progeny() {
        let k = OffspringKernel::build(&SizeDistribution::point(2), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(simulate_progeny(&k, 1, 1000, &mut rng), Progeny::Finite(1));
        }
        assert_eq!(simulate_progeny(&k, 1, 1, &mut rng), Progeny::Capped);
    }

    #[test]
    fn monte_carlo_survival() {
        let k = OffspringKernel::build(&SizeDistribution::point(2), 4.0).unwrap();
        let est = survival_mc(&k, 3, 1000, 20_000, 3);
        assert!(est.estimate <= 3.0 * est.stderr + 1e-2);

        let k = OffspringKernel::build(&SizeDistribution::point(2), 1.0).unwrap();
        let a = survival_mc(&k, 3, 1000, 5_000, 17);
        let b = survival_mc(&k, 3, 1000, 5_000, 17);
        assert_eq!(a, b);
        let rho = solve_extinction(&k, Default::default()).survival(3);
        assert!((a.estimate - rho).abs() <= 3.0 * a.stderr + 0.003);

        let ests: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&cap| survival_mc(&k, 3, cap, 5_000, 17).estimate)
            .collect();
        assert!(ests.windows(2).all(|w| w[0] >= w[1]), "{ests:?}");
    }
}
