//! Intersection probabilities of a uniform random `a`-subset `A` of a ground
//! set of size `k` with fixed disjoint sets `B` (size `b`) and `H` (size `h`).
//!
//! | function        | event                                  |
//! |-----------------|----------------------------------------|
//! | `p_hit`         | `A ∩ B ≠ ∅`                            |
//! | `p_one`         | `|A ∩ B| = 1`                          |
//! | `p_two`         | `|A ∩ B| ≥ 2`                          |
//! | `p_one_avoid`   | `|A ∩ B| = 1` and `A ∩ H = ∅`          |
//! | `p_one_hit`     | `|A ∩ B| = 1` and `A ∩ H ≠ ∅`          |
//!
//! The `*_exact` functions work in arbitrary-precision rationals. The `f64`
//! entry points use them up to [`EXACT_LIMIT`] and switch to a product form
//! evaluated with `ln_1p`/`expm1` above it.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest ground-set size evaluated in exact arithmetic by the `f64` API.
pub const EXACT_LIMIT: u64 = 10_000;

/// Largest ground-set size accepted by [`enumerate_oracle`].
pub const ENUMERATION_LIMIT: u64 = 20;

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(big(n), big(d))
}

/// `C(x, r)`, zero when `r < 0` or `x < r`.
fn binom(x: i64, r: i64) -> BigInt {
    if r < 0 || x < r {
        return BigInt::zero();
    }
    let r = r.min(x - r);
    let mut acc = BigInt::one();
    for i in 0..r {
        acc = acc * big(x - i) / big(i + 1);
    }
    acc
}

/// Falling factorial `(x)_r = x (x-1) ... (x-r+1)`.
fn falling(x: i64, r: i64) -> BigInt {
    (0..r).fold(BigInt::one(), |acc, i| acc * big(x - i))
}

fn check_pair(a: u64, b: u64, k: u64) -> Result<()> {
    if k == 0 || a > k || b > k {
        return Err(Error::OutOfRange(format!("a={a}, b={b}, k={k}")));
    }
    Ok(())
}

fn check_triple(a: u64, b: u64, h: u64, k: u64) -> Result<()> {
    check_pair(a, b, k)?;
    if b + h > k {
        return Err(Error::OutOfRange(format!(
            "B and H must be disjoint in a set of {k}: b={b}, h={h}"
        )));
    }
    Ok(())
}

// Unchecked closed forms; `k` may be zero here (used by the factorization).
fn hit_raw(a: i64, b: i64, k: i64) -> BigRational {
    BigRational::one() - BigRational::new(binom(k - b, a), binom(k, a))
}

fn one_raw(a: i64, b: i64, k: i64) -> BigRational {
    BigRational::new(big(b) * binom(k - b, a - 1), binom(k, a))
}

/// `P(A ∩ B ≠ ∅) = 1 - C(k-b, a) / C(k, a)`.
pub fn p_hit_exact(a: u64, b: u64, k: u64) -> Result<BigRational> {
    check_pair(a, b, k)?;
    Ok(hit_raw(a as i64, b as i64, k as i64))
}

/// `P(|A ∩ B| = 1) = b C(k-b, a-1) / C(k, a)`.
pub fn p_one_exact(a: u64, b: u64, k: u64) -> Result<BigRational> {
    check_pair(a, b, k)?;
    Ok(one_raw(a as i64, b as i64, k as i64))
}

pub fn p_two_exact(a: u64, b: u64, k: u64) -> Result<BigRational> {
    Ok(p_hit_exact(a, b, k)? - p_one_exact(a, b, k)?)
}

/// `p_one` through `a P(A ∩ B = {x_1}) = a b (k-b)_(a-1) / (k)_a`.
pub fn p_one_falling(a: u64, b: u64, k: u64) -> Result<BigRational> {
    check_pair(a, b, k)?;
    if a == 0 {
        return Ok(BigRational::zero());
    }
    let (a, b, k) = (a as i64, b as i64, k as i64);
    Ok(BigRational::new(
        big(a) * big(b) * falling(k - b, a - 1),
        falling(k, a),
    ))
}

/// `P(|A ∩ B| = 1, A ∩ H = ∅) = b C(k-b-h, a-1) / C(k, a)`.
pub fn p_one_avoid_exact(a: u64, b: u64, h: u64, k: u64) -> Result<BigRational> {
    check_triple(a, b, h, k)?;
    let (a, b, h, k) = (a as i64, b as i64, h as i64, k as i64);
    Ok(BigRational::new(
        big(b) * binom(k - b - h, a - 1),
        binom(k, a),
    ))
}

pub fn p_one_hit_exact(a: u64, b: u64, h: u64, k: u64) -> Result<BigRational> {
    Ok(p_one_exact(a, b, k)? - p_one_avoid_exact(a, b, h, k)?)
}

/// `p_one_avoid` through `p_one(a,b,k) (1 - p_hit(a-1, h, k-b))`.
pub fn p_one_avoid_factored(a: u64, b: u64, h: u64, k: u64) -> Result<BigRational> {
    check_triple(a, b, h, k)?;
    // p_one vanishes and the conditional factor is undefined.
    if a == 0 || a - 1 > k - b {
        return Ok(BigRational::zero());
    }
    let (a, b, h, k) = (a as i64, b as i64, h as i64, k as i64);
    Ok(one_raw(a, b, k) * (BigRational::one() - hit_raw(a - 1, h, k - b)))
}

/// `p_one_hit` through `p_one(a,b,k) p_hit(a-1, h, k-b)`.
pub fn p_one_hit_factored(a: u64, b: u64, h: u64, k: u64) -> Result<BigRational> {
    check_triple(a, b, h, k)?;
    // p_one vanishes and the conditional factor is undefined.
    if a == 0 || a - 1 > k - b {
        return Ok(BigRational::zero());
    }
    let (a, b, h, k) = (a as i64, b as i64, h as i64, k as i64);
    Ok(one_raw(a, b, k) * hit_raw(a - 1, h, k - b))
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Product-form evaluation for large ground sets.
mod float {
    /// `C(k-b, a) / C(k, a) = prod_{i<a} (1 - b / (k - i))`.
    pub(super) fn miss(a: u64, b: u64, k: u64) -> f64 {
        if a + b > k {
            return 0.0;
        }
        let ln: f64 = (0..a).map(|i| (-(b as f64) / (k - i) as f64).ln_1p()).sum();
        ln.exp()
    }

    pub(super) fn hit(a: u64, b: u64, k: u64) -> f64 {
        if a == 0 || b == 0 {
            return 0.0;
        }
        if a + b > k {
            return 1.0;
        }
        let ln: f64 = (0..a).map(|i| (-(b as f64) / (k - i) as f64).ln_1p()).sum();
        -ln.exp_m1()
    }

    /// `(a b / k) prod_{i < a-1} (1 - (b-1) / (k-1-i))`.
    pub(super) fn one(a: u64, b: u64, k: u64) -> f64 {
        if a == 0 || b == 0 || a + b > k + 1 {
            return 0.0;
        }
        let ln: f64 = (0..a - 1)
            .map(|i| (-((b - 1) as f64) / (k - 1 - i) as f64).ln_1p())
            .sum();
        a as f64 * b as f64 / k as f64 * ln.exp()
    }

    /// Sums the hypergeometric tail from `j = 2` by the ratio recurrence.
    pub(super) fn two(a: u64, b: u64, k: u64) -> f64 {
        if a < 2 || b < 2 {
            return 0.0;
        }
        if a + b > k + 1 {
            // |A ∩ B| ≥ a + b - k ≥ 2 surely.
            return 1.0;
        }
        let mut term = one(a, b, k);
        let mut total = 0.0;
        let top = a.min(b);
        for j in 1..top {
            let (jf, af, bf, kf) = (j as f64, a as f64, b as f64, k as f64);
            term *= (bf - jf) * (af - jf) / ((jf + 1.0) * (kf - bf - af + jf + 1.0));
            total += term;
            if term < total * 1e-18 {
                break;
            }
        }
        total
    }
}

pub fn p_hit(a: u64, b: u64, k: u64) -> Result<f64> {
    check_pair(a, b, k)?;
    Ok(if k <= EXACT_LIMIT {
        to_f64(&p_hit_exact(a, b, k)?)
    } else {
        float::hit(a, b, k)
    })
}

pub fn p_one(a: u64, b: u64, k: u64) -> Result<f64> {
    check_pair(a, b, k)?;
    Ok(if k <= EXACT_LIMIT {
        to_f64(&p_one_exact(a, b, k)?)
    } else {
        float::one(a, b, k)
    })
}

pub fn p_two(a: u64, b: u64, k: u64) -> Result<f64> {
    check_pair(a, b, k)?;
    Ok(if k <= EXACT_LIMIT {
        to_f64(&p_two_exact(a, b, k)?)
    } else {
        float::two(a, b, k)
    })
}

pub fn p_one_avoid(a: u64, b: u64, h: u64, k: u64) -> Result<f64> {
    check_triple(a, b, h, k)?;
    Ok(if k <= EXACT_LIMIT {
        to_f64(&p_one_avoid_exact(a, b, h, k)?)
    } else if a == 0 {
        0.0
    } else {
        float::one(a, b, k) * float::miss(a - 1, h, k - b)
    })
}

pub fn p_one_hit(a: u64, b: u64, h: u64, k: u64) -> Result<f64> {
    check_triple(a, b, h, k)?;
    Ok(if k <= EXACT_LIMIT {
        to_f64(&p_one_hit_exact(a, b, h, k)?)
    } else if a == 0 {
        0.0
    } else {
        float::one(a, b, k) * float::hit(a - 1, h, k - b)
    })
}

/// Sizes `(a, b, h, k)` of a bound query. `h = 0` when no avoid set is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntersectionQuery {
    pub a: u64,
    pub b: u64,
    pub h: u64,
    pub k: u64,
}

impl IntersectionQuery {
    pub fn new(a: u64, b: u64, h: u64, k: u64) -> Self {
        IntersectionQuery { a, b, h, k }
    }

    /// `ab / k`.
    pub fn kappa(&self) -> BigRational {
        ratio((self.a * self.b) as i64, self.k as i64)
    }

    /// `ab / (k - a)`; zero when `ab = 0`.
    pub fn kappa_prime(&self) -> BigRational {
        let num = (self.a * self.b) as i64;
        if num == 0 {
            BigRational::zero()
        } else {
            ratio(num, self.k as i64 - self.a as i64)
        }
    }

    /// `(a - 1) h / (k - b)`; zero when `h = 0`. Also used as the constant of
    /// the `p_one_hit` bound.
    pub fn kappa_second(&self) -> BigRational {
        if self.h == 0 {
            BigRational::zero()
        } else {
            ratio(
                (self.a as i64 - 1) * self.h as i64,
                (self.k - self.b) as i64,
            )
        }
    }
}

/// Which intersection inequality a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    /// `κ(1-κ') ≤ p_one ≤ p_hit ≤ κ`, reported as two links.
    Pab,
    /// `p_two ≤ κ²/2`.
    P2ab,
    /// `κ(1-κ'-κ'') ≤ p_one_avoid ≤ κ`.
    Pabh,
    /// `p_one_hit ≤ κ'' κ`.
    PabhPlus1,
}

impl Bound {
    pub fn name(self) -> &'static str {
        match self {
            Bound::Pab => "pab",
            Bound::P2ab => "p2ab",
            Bound::Pabh => "pabh",
            Bound::PabhPlus1 => "pabh+1",
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub bound: Bound,
    /// Name of the probability in the middle of the inequality.
    pub quantity: &'static str,
    pub value: BigRational,
    pub lower: Option<BigRational>,
    pub upper: BigRational,
    pub holds: bool,
    /// The lower bound is negative and therefore says nothing.
    pub vacuous: bool,
}

impl BoundReport {
    fn new(
        bound: Bound,
        quantity: &'static str,
        lower: Option<BigRational>,
        value: BigRational,
        upper: BigRational,
    ) -> Self {
        let holds = lower.as_ref().is_none_or(|l| *l <= value) && value <= upper;
        let vacuous = lower.as_ref().is_some_and(|l| l.is_negative());
        BoundReport {
            bound,
            quantity,
            value,
            lower,
            upper,
            holds,
            vacuous,
        }
    }
}

/// Evaluates every intersection inequality whose preconditions hold for `q`.
pub fn check_lemma1(q: IntersectionQuery) -> Result<Vec<BoundReport>> {
    let IntersectionQuery { a, b, h, k } = q;
    if k < 4 {
        return Err(Error::Precondition(format!("k = {k} < 4")));
    }
    if a + b > k {
        return Err(Error::Precondition(format!("a + b = {} > k = {k}", a + b)));
    }
    let kappa = q.kappa();
    let kappa_p = q.kappa_prime();
    let one = BigRational::one();
    let p1 = p_one_exact(a, b, k)?;
    let p = p_hit_exact(a, b, k)?;
    let p2 = &p - &p1;

    let mut out = vec![
        BoundReport::new(
            Bound::Pab,
            "p1",
            Some(&kappa * (&one - &kappa_p)),
            p1,
            p.clone(),
        ),
        BoundReport::new(
            Bound::Pab,
            "p",
            Some(p_one_exact(a, b, k)?),
            p,
            kappa.clone(),
        ),
        BoundReport::new(
            Bound::P2ab,
            "p2",
            None,
            p2,
            &kappa * &kappa / BigRational::from_integer(big(2)),
        ),
    ];

    if a + b + h <= k {
        let kappa_s = q.kappa_second();
        out.push(BoundReport::new(
            Bound::Pabh,
            "p(a,b,h,k)",
            Some(&kappa * (&one - &kappa_p - &kappa_s)),
            p_one_avoid_exact(a, b, h, k)?,
            kappa.clone(),
        ));
        out.push(BoundReport::new(
            Bound::PabhPlus1,
            "p1(a,b,h,k)",
            None,
            p_one_hit_exact(a, b, h, k)?,
            &kappa_s * &kappa,
        ));
    }
    Ok(out)
}

/// All five probabilities for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionProbabilities {
    pub p_hit: BigRational,
    pub p_one: BigRational,
    pub p_two: BigRational,
    pub p_one_avoid: BigRational,
    pub p_one_hit: BigRational,
}

impl IntersectionProbabilities {
    /// Closed-form evaluation.
    pub fn closed_form(a: u64, b: u64, h: u64, k: u64) -> Result<Self> {
        Ok(IntersectionProbabilities {
            p_hit: p_hit_exact(a, b, k)?,
            p_one: p_one_exact(a, b, k)?,
            p_two: p_two_exact(a, b, k)?,
            p_one_avoid: p_one_avoid_exact(a, b, h, k)?,
            p_one_hit: p_one_hit_exact(a, b, h, k)?,
        })
    }
}

/// Brute force: walks every `a`-subset of `{0, ..., k-1}` with
/// `B = {0, ..., b-1}` and `H = {b, ..., b+h-1}`.
pub fn enumerate_oracle(a: u64, b: u64, h: u64, k: u64) -> Result<IntersectionProbabilities> {
    if k > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge(k as usize));
    }
    if a > k || b + h > k {
        return Err(Error::OutOfRange(format!("a={a}, b={b}, h={h}, k={k}")));
    }
    let b_mask: u32 = (1u32 << b) - 1;
    let h_mask: u32 = ((1u32 << h) - 1) << b;
    let (mut total, mut hit, mut one, mut two, mut avoid, mut one_hit) = (0i64, 0, 0, 0, 0, 0);
    let mut visit = |set: u32| {
        total += 1;
        let inter = (set & b_mask).count_ones();
        let touches_h = set & h_mask != 0;
        hit += (inter >= 1) as i64;
        two += (inter >= 2) as i64;
        if inter == 1 {
            one += 1;
            if touches_h {
                one_hit += 1;
            } else {
                avoid += 1;
            }
        }
    };
    if a == 0 {
        visit(0);
    } else {
        // Gosper's hack over k-bit words with `a` bits set.
        let mut set: u32 = (1u32 << a) - 1;
        let limit: u64 = 1u64 << k;
        while (set as u64) < limit {
            visit(set);
            let c = set & set.wrapping_neg();
            let r = set + c;
            if r == 0 {
                break;
            }
            set = (((r ^ set) >> 2) / c) | r;
        }
    }
    Ok(IntersectionProbabilities {
        p_hit: ratio(hit, total),
        p_one: ratio(one, total),
        p_two: ratio(two, total),
        p_one_avoid: ratio(avoid, total),
        p_one_hit: ratio(one_hit, total),
    })
}

/// Outcome of sweeping the inequalities over a `(a, b, h, k)` grid.
#[derive(Debug, Clone, Default)]
pub struct GridSummary {
    pub queries: usize,
    pub reports: usize,
    pub vacuous: usize,
    pub violations: Vec<(IntersectionQuery, Bound, &'static str)>,
}

/// Checks every query with `k` in `ks` and `a + b + h ≤ k`.
pub fn verify_grid(ks: std::ops::RangeInclusive<u64>) -> Result<GridSummary> {
    let queries: Vec<IntersectionQuery> = ks
        .filter(|&k| k >= 4)
        .flat_map(|k| {
            (0..=k).flat_map(move |a| {
                (0..=k - a).flat_map(move |b| {
                    (0..=k - a - b).map(move |h| IntersectionQuery::new(a, b, h, k))
                })
            })
        })
        .collect();
    queries
        .par_iter()
        .map(|&q| {
            let reports = check_lemma1(q)?;
            let mut s = GridSummary {
                queries: 1,
                reports: reports.len(),
                ..Default::default()
            };
            for r in reports {
                s.vacuous += r.vacuous as usize;
                if !r.holds {
                    s.violations.push((q, r.bound, r.quantity));
                }
            }
            Ok(s)
        })
        .try_reduce(GridSummary::default, |mut x, y| {
            x.queries += y.queries;
            x.reports += y.reports;
            x.vacuous += y.vacuous;
            x.violations.extend(y.violations);
            Ok(x)
        })
}
