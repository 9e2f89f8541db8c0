//! Property checks shared by the property tests and the acceptance run.

use super::binomial_pmf;
use ealab::bounds::{bernoulli_lb, multbin_lb_check};
use ealab::seed::{mix64, rng_from_seed};
use ealab::{mutate, run_batch, BitString, EaConfig, FitnessFn, TiePolicy, Variant};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Chi-square goodness of fit of the number of flipped bits under rate 1/n
/// against Binomial(n, 1/n). Bins with expected count below 5 are merged
/// into the tail. Returns the p-value.
pub fn flip_count_chi_square(n: usize, draws: usize, seed: u64) -> f64 {
    let p = 1.0 / n as f64;
    let mut rng = rng_from_seed(seed);
    let parent = BitString::random(n, &mut rng);
    let mut observed = vec![0usize; n + 1];
    for _ in 0..draws {
        observed[mutate(&parent, p, &mut rng).hamming(&parent)] += 1;
    }
    let expected: Vec<f64> = (0..=n).map(|k| draws as f64 * binomial_pmf(n, p, k)).collect();
    let mut last = expected.iter().take_while(|&&e| e >= 5.0).count().min(n);
    while last > 0 && expected[last..].iter().sum::<f64>() < 5.0 {
        last -= 1;
    }
    let mut stat = 0.0;
    for k in 0..last {
        stat += (observed[k] as f64 - expected[k]).powi(2) / expected[k];
    }
    let tail_obs: usize = observed[last..].iter().sum();
    let tail_exp: f64 = expected[last..].iter().sum();
    stat += (tail_obs as f64 - tail_exp).powi(2) / tail_exp;
    let dof = last as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

/// Best-fitness traces of elitist variants never decrease; population size,
/// trace length and evaluation counts are consistent. Returns the number of
/// traces checked.
pub fn elitism_traces(seed: u64) -> Result<usize, String> {
    let mut checked = 0;
    let configs = [
        (Variant::Plus, 20, 1, 1),
        (Variant::Plus, 30, 5, 2),
        (Variant::Plus, 30, 3, 30),
        (Variant::FairPlus, 25, 6, 6),
        (Variant::FairPlus, 40, 1, 1),
    ];
    for (index, &(variant, n, mu, lambda)) in configs.iter().enumerate() {
        for policy in [TiePolicy::OffspringFirstRandom, TiePolicy::UniformRandom] {
            for fitness in [FitnessFn::onemax(n), FitnessFn::multi_opt_onemax(n, 3).unwrap()] {
                let config = EaConfig::new(n, mu, lambda, variant)
                    .with_tie_policy(policy)
                    .with_seed(mix64(seed, index as u64));
                for r in run_batch(&config, &fitness, 40).map_err(|e| e.to_string())? {
                    let trace = &r.best_fitness_trace;
                    if trace.len() as u64 != r.iterations + 1 {
                        return Err(format!("trace length {} for {} iterations", trace.len(), r.iterations));
                    }
                    if let Some(w) = trace.windows(2).find(|w| w[1] < w[0]) {
                        return Err(format!("{variant} n={n} mu={mu} lambda={lambda}: best fell {} -> {}", w[0], w[1]));
                    }
                    if r.evaluations != (mu + lambda * r.iterations as usize) as u64 {
                        return Err("evaluation count mismatch".into());
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

/// `1 − (1 − x)^n ≥ 1/(1 + 1/(xn))` on random pairs; returns the first
/// violation.
pub fn lemma3_pairs(pairs: usize, seed: u64) -> Result<(), (f64, u64)> {
    let mut rng = rng_from_seed(seed);
    for _ in 0..pairs {
        let x: f64 = rng.random();
        let n: u64 = rng.random_range(1..=10_000);
        let lhs = 1.0 - (1.0 - x).powf(n as f64);
        if lhs < bernoulli_lb(x, n as f64) {
            return Err((x, n));
        }
    }
    Ok(())
}

/// Empirical `Pr[X ≥ E X]` for `X ~ Bin(λ, j/(2eμ))` with λ=100, μ=10, j=3,
/// with its standard error.
pub fn lemma2_frequency(samples: u64, seed: u64) -> (f64, f64) {
    let p = 3.0 / (2.0 * std::f64::consts::E * 10.0);
    let hat = multbin_lb_check(100, p, samples, &mut rng_from_seed(seed)).unwrap();
    (hat, (hat * (1.0 - hat) / samples as f64).sqrt())
}
