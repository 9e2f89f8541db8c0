//! Closed-form runtime bounds and probability inequalities.
//!
//! All logarithms are natural. Population sizes are taken as reals so the
//! formulas can be evaluated exactly at regime boundaries such as
//! `λ/μ = e^e`; the bounds are plain values without hidden constants.

use std::f64::consts::E;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `log⁺ x = max{1, ln x}`.
pub fn log_plus(x: f64) -> f64 {
    if x > E {
        x.ln()
    } else {
        1.0
    }
}

/// `log⁺ log⁺ x`.
pub fn log_plus_log_plus(x: f64) -> f64 {
    log_plus(log_plus(x))
}

/// `e^e`, the offspring-to-parent ratio above which the fast regime applies.
pub fn fast_threshold() -> f64 {
    E.exp()
}

/// `e_n = (1 - 1/n)^(-n)`.
pub fn e_n(n: f64) -> f64 {
    (1.0 - 1.0 / n).powf(-n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    General,
    FastLambda,
}

/// The three terms of the master runtime bound and their sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: f64,
    pub mu: f64,
    pub lambda: f64,
    pub term_coupon: f64,
    pub term_pop: f64,
    pub term_fast: f64,
    pub total: f64,
    pub regime: Regime,
}

/// `n ln n/λ + nμ/λ + n log⁺log⁺(λ/μ)/log⁺(λ/μ)`.
pub fn master_bound(n: f64, mu: f64, lambda: f64) -> BoundReport {
    let ratio = lambda / mu;
    let term_coupon = n * n.ln() / lambda;
    let term_pop = n * mu / lambda;
    let term_fast = n * log_plus_log_plus(ratio) / log_plus(ratio);
    BoundReport {
        n,
        mu,
        lambda,
        term_coupon,
        term_pop,
        term_fast,
        total: term_coupon + term_pop + term_fast,
        regime: if ratio >= fast_threshold() {
            Regime::FastLambda
        } else {
            Regime::General
        },
    }
}

impl BoundReport {
    /// Human-readable aligned rendering.
    pub fn to_text(&self) -> String {
        let regime = match self.regime {
            Regime::General => "general",
            Regime::FastLambda => "fast-lambda",
        };
        format!(
            "n            {:>14}\nmu           {:>14}\nlambda       {:>14}\nterm_coupon  {:>14.6}\nterm_pop     {:>14.6}\nterm_fast    {:>14.6}\ntotal        {:>14.6}\nregime       {:>14}\n",
            self.n, self.mu, self.lambda, self.term_coupon, self.term_pop, self.term_fast, self.total, regime
        )
    }
}

/// Fitness gain granularity and phase thresholds of the fast-regime analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams {
    pub gamma: u64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl PhaseParams {
    /// `γ = ⌊ln(λ/μ) / (2 ln ln(λ/μ))⌋`, `b1 = n − n/ln(λ/μ)`,
    /// `b2 = n − μn/λ`, `b3 = n − n/λ`. Requires `λ/μ > e`.
    pub fn new(n: f64, mu: f64, lambda: f64) -> Result<Self> {
        let ratio = lambda / mu;
        if ratio <= E {
            return Err(invalid(format!("phase parameters need lambda/mu > e, got {ratio}")));
        }
        let l = ratio.ln();
        Ok(PhaseParams {
            gamma: (l / (2.0 * l.ln())).floor() as u64,
            b1: n - n / l,
            b2: n - mu * n / lambda,
            b3: n - n / lambda,
        })
    }
}

fn check_counts(mu: f64, j1: u64, j2: u64) -> Result<()> {
    if j1 < 1 || j1 >= j2 || j2 as f64 > mu {
        return Err(invalid(format!("need 1 <= j1 < j2 <= mu, got j1={j1}, j2={j2}, mu={mu}")));
    }
    Ok(())
}

fn check_pops(mu: f64, lambda: f64) -> Result<()> {
    if !(mu >= 1.0 && lambda >= 1.0) {
        return Err(invalid(format!("need mu, lambda >= 1, got mu={mu}, lambda={lambda}")));
    }
    Ok(())
}

/// `(2eμ/λ)(ln(j2/j1) + 1) + (j2 − j1)`.
pub fn takeover_bound_general(mu: f64, lambda: f64, j1: u64, j2: u64) -> Result<f64> {
    check_pops(mu, lambda)?;
    check_counts(mu, j1, j2)?;
    let ratio = j2 as f64 / j1 as f64;
    Ok(2.0 * E * mu / lambda * (ratio.ln() + 1.0) + (j2 - j1) as f64)
}

/// `4 ln(j2/j1) / ln(λ/(2eμ)) + 4`, valid for `λ/μ ≥ e^e`.
pub fn takeover_bound_fast(mu: f64, lambda: f64, j1: u64, j2: u64) -> Result<f64> {
    check_pops(mu, lambda)?;
    check_counts(mu, j1, j2)?;
    if lambda / mu < fast_threshold() {
        return Err(Error::Premise(format!("fast takeover bound needs lambda/mu >= e^e, got {}", lambda / mu)));
    }
    let ratio = j2 as f64 / j1 as f64;
    Ok(4.0 * ratio.ln() / (lambda / (2.0 * E * mu)).ln() + 4.0)
}

fn check_level(n: f64, mu: f64, i: u64, mu0: u64) -> Result<()> {
    if n < 2.0 || i as f64 > n - 1.0 {
        return Err(invalid(format!("need n >= 2 and 0 <= i <= n-1, got n={n}, i={i}")));
    }
    if mu0 < 1 || mu0 as f64 > mu {
        return Err(invalid(format!("need 1 <= mu0 <= mu, got mu0={mu0}, mu={mu}")));
    }
    Ok(())
}

fn improvement_term(n: f64, mu: f64, lambda: f64, i: u64, mu0: u64) -> f64 {
    E * mu * n / (lambda * (n - i as f64) * mu0 as f64)
}

/// `μ0 + (2eμ/λ)(ln μ0 + 1) + eμn/(λ(n−i)μ0)`: expected time to leave level `i`.
pub fn level_bound_general(n: f64, mu: f64, lambda: f64, i: u64, mu0: u64) -> Result<f64> {
    check_pops(mu, lambda)?;
    check_level(n, mu, i, mu0)?;
    let m0 = mu0 as f64;
    Ok(m0 + 2.0 * E * mu / lambda * (m0.ln() + 1.0) + improvement_term(n, mu, lambda, i, mu0))
}

/// `4 ln μ0 / ln(λ/(2eμ)) + eμn/(λ(n−i)μ0) + 5`, valid for `λ/μ > e^e`.
pub fn level_bound_fast(n: f64, mu: f64, lambda: f64, i: u64, mu0: u64) -> Result<f64> {
    check_pops(mu, lambda)?;
    check_level(n, mu, i, mu0)?;
    if lambda / mu <= fast_threshold() {
        return Err(Error::Premise(format!("fast level bound needs lambda/mu > e^e, got {}", lambda / mu)));
    }
    let log_term = 4.0 * (mu0 as f64).ln() / (lambda / (2.0 * E * mu)).ln();
    Ok(log_term + improvement_term(n, mu, lambda, i, mu0) + 5.0)
}

/// Minimizes a level bound over `μ0 ∈ [1..⌊μ⌋]`; returns `(μ0, value)`.
/// Ties keep the smallest `μ0`.
pub fn minimize_over_mu0<F>(mu: f64, mut bound: F) -> Result<(u64, f64)>
where
    F: FnMut(u64) -> Result<f64>,
{
    let top = mu.floor() as u64;
    let mut best: Option<(u64, f64)> = None;
    for mu0 in 1..=top {
        let value = bound(mu0)?;
        if best.is_none_or(|(_, v)| value < v) {
            best = Some((mu0, value));
        }
    }
    best.ok_or_else(|| invalid(format!("mu={mu} admits no mu0")))
}

/// `⌈log₅ μ⌉ (32/(1 − 1/e) · μ/λ + 1)`.
pub fn sudholt_bound(mu: u64, lambda: f64) -> Result<f64> {
    if mu < 1 || !(lambda > 0.0) {
        return Err(invalid(format!("need mu >= 1 and lambda > 0, got mu={mu}, lambda={lambda}")));
    }
    Ok(ceil_log5(mu) as f64 * (32.0 / (1.0 - 1.0 / E) * mu as f64 / lambda + 1.0))
}

/// Smallest `k` with `5^k ≥ m`, computed in integers.
fn ceil_log5(m: u64) -> u32 {
    let mut k = 0;
    let mut pow: u128 = 1;
    while pow < m as u128 {
        pow *= 5;
        k += 1;
    }
    k
}

/// Sum of expected level-leaving times.
pub fn fitness_level_sum(level_times: &[f64]) -> f64 {
    debug_assert!(level_times.iter().all(|&t| t >= 0.0));
    level_times.iter().sum()
}

/// `1/(1 + 1/(xn))`, a lower bound on `1 − (1 − x)^n`.
pub fn bernoulli_lb(x: f64, n: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    1.0 / (1.0 + 1.0 / (x * n))
}

/// Empirical frequency of `X ≥ E[X]` for `X ~ Bin(n, p)` with `p > 1/n`.
pub fn multbin_lb_check<R: Rng + ?Sized>(n: u64, p: f64, samples: u64, rng: &mut R) -> Result<f64> {
    if n == 0 || !(p > 1.0 / n as f64 && p <= 1.0) {
        return Err(Error::Premise(format!("need p > 1/n, got n={n}, p={p}")));
    }
    if samples == 0 {
        return Err(invalid("samples must be positive"));
    }
    let dist = Binomial::new(n, p).map_err(|e| invalid(e.to_string()))?;
    // Guards against `n * p` rounding just above an integer mean.
    let mean = n as f64 * p * (1.0 - 1e-12);
    let hits = (0..samples).filter(|_| dist.sample(rng) as f64 >= mean).count();
    Ok(hits as f64 / samples as f64)
}
