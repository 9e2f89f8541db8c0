//! Takeover times, level-leaving times and the copy-only EA⁰ process.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{EaConfig, Engine, Member, TiePolicy, Variant};
use crate::error::{invalid, Result};
use crate::genotype::{FitnessFn, MutationRate};
use crate::seed::{mix64, rng_from_seed};
use crate::stats::SampleStats;

const DEFAULT_TAKEOVER_BUDGET: u64 = 1_000_000;

/// Measurement of τ_{j1,j2}(i) for the (μ+λ) EA on OneMax.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TakeoverSpec {
    pub n: usize,
    pub mu: usize,
    pub lambda: usize,
    pub c: f64,
    /// Plateau fitness level.
    pub i: usize,
    pub j1: usize,
    pub j2: usize,
    pub replicates: usize,
    pub seed: u64,
    pub tie_policy: TiePolicy,
    pub max_iterations: u64,
}

impl TakeoverSpec {
    pub fn new(n: usize, mu: usize, lambda: usize, i: usize, j1: usize, j2: usize) -> Self {
        TakeoverSpec {
            n,
            mu,
            lambda,
            c: 1.0,
            i,
            j1,
            j2,
            replicates: 1000,
            seed: 0,
            tie_policy: TiePolicy::default(),
            max_iterations: DEFAULT_TAKEOVER_BUDGET,
        }
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_counts(self.mu, self.j1, self.j2)?;
        if self.n < 2 || self.i > self.n - 1 {
            return Err(invalid(format!("need n >= 2 and 0 <= i <= n-1, got n={}, i={}", self.n, self.i)));
        }
        if self.replicates == 0 {
            return Err(invalid("replicates must be >= 1"));
        }
        self.config().validate()
    }

    fn config(&self) -> EaConfig {
        EaConfig::new(self.n, self.mu, self.lambda, Variant::Plus)
            .with_rate(MutationRate { c: self.c })
            .with_tie_policy(self.tie_policy)
            .with_budget(self.max_iterations.max(1))
    }
}

/// Measurement of τ*_{j1,j2} for the copy-only process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ea0Spec {
    pub n: usize,
    pub mu: usize,
    pub lambda: usize,
    pub j1: usize,
    pub j2: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl Ea0Spec {
    pub fn new(n: usize, mu: usize, lambda: usize, j1: usize, j2: usize) -> Self {
        Ea0Spec {
            n,
            mu,
            lambda,
            j1,
            j2,
            replicates: 1000,
            seed: 0,
        }
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_counts(self.mu, self.j1, self.j2)?;
        if self.n < 2 || self.lambda == 0 {
            return Err(invalid(format!("need n >= 2 and lambda >= 1, got n={}, lambda={}", self.n, self.lambda)));
        }
        if self.replicates == 0 {
            return Err(invalid("replicates must be >= 1"));
        }
        Ok(())
    }

    /// Probability that one offspring of a desired parent is an exact copy,
    /// `(1 - 1/n)^n`.
    pub fn copy_probability(&self) -> f64 {
        (1.0 - 1.0 / self.n as f64).powi(self.n as i32)
    }
}

fn check_counts(mu: usize, j1: usize, j2: usize) -> Result<()> {
    if j1 < 1 || j1 >= j2 || j2 > mu {
        return Err(invalid(format!("need 1 <= j1 < j2 <= mu, got j1={j1}, j2={j2}, mu={mu}")));
    }
    Ok(())
}

/// Sample of iteration counts; `stats` summarize the completed replicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeStats {
    pub stats: SampleStats,
    /// Replicates that hit their iteration cap.
    pub exhausted: usize,
    /// Iteration count per replicate in replicate order (capped value for
    /// exhausted ones).
    pub samples: Vec<u64>,
}

impl TimeStats {
    fn collect(outcomes: Vec<(u64, bool)>) -> Self {
        let completed: Vec<u64> = outcomes.iter().filter(|(_, done)| *done).map(|(t, _)| *t).collect();
        TimeStats {
            stats: SampleStats::from_counts(&completed),
            exhausted: outcomes.len() - completed.len(),
            samples: outcomes.into_iter().map(|(t, _)| t).collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.stats.mean
    }

    pub fn stderr(&self) -> f64 {
        self.stats.stderr
    }
}

/// Population with one individual (or `fit` individuals) at fitness `level`
/// and the rest one level below. At level 0 the fillers share the fit
/// genotype and fit individuals are told apart by the lineage mark.
fn plateau_population(f: &FitnessFn, mu: usize, fit: usize, level: usize) -> Vec<Member> {
    let top = Member::new(f.level_representative(level), f).expect("dimension checked").marked();
    let filler = if level == 0 {
        Member::new(f.level_representative(0), f).expect("dimension checked")
    } else {
        Member::new(f.level_representative(level - 1), f).expect("dimension checked")
    };
    let mut members = vec![top; fit];
    members.extend(std::iter::repeat_n(filler, mu - fit));
    members
}

fn fit_count(members: &[Member], level: usize) -> usize {
    if level == 0 {
        members.iter().filter(|m| m.marked || m.fitness >= 1).count()
    } else {
        members.iter().filter(|m| m.fitness >= level as i64).count()
    }
}

/// Iterations until at least `j2` members are fit, starting from exactly `j1`
/// fit members and `μ − j1` fillers one level below.
pub fn measure_takeover(spec: &TakeoverSpec) -> Result<TimeStats> {
    spec.validate()?;
    let config = spec.config();
    let f = FitnessFn::onemax(spec.n);
    let outcomes = (0..spec.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let members = plateau_population(&f, spec.mu, spec.j1, spec.i);
            let mut engine = Engine::with_population(&config, &f, members, rng_from_seed(mix64(spec.seed, r)))
                .expect("validated");
            while fit_count(engine.population().members(), spec.i) < spec.j2 {
                if engine.iteration() >= config.max_iterations {
                    return (engine.iteration(), false);
                }
                engine.step();
            }
            (engine.iteration(), true)
        })
        .collect();
    Ok(TimeStats::collect(outcomes))
}

/// Desired-count trajectory of one EA⁰ run, starting at `j1` and ending at
/// the first count `≥ j2`.
pub fn ea0_trajectory<R: Rng + ?Sized>(spec: &Ea0Spec, rng: &mut R) -> Result<Vec<usize>> {
    spec.validate()?;
    let copy = spec.copy_probability();
    let mut j = spec.j1;
    let mut trace = vec![j];
    while j < spec.j2 {
        let p = (j as f64 * copy / spec.mu as f64).min(1.0);
        let born = Binomial::new(spec.lambda as u64, p).map_err(|e| invalid(e.to_string()))?.sample(rng) as usize;
        j = (j + born).min(spec.mu);
        trace.push(j);
    }
    Ok(trace)
}

/// Statistics of τ*, the number of iterations of the copy-only process.
///
/// The process only depends on the number of desired individuals, so it is
/// simulated on that count: each of the λ offspring picks one of μ parents
/// and is an accepted copy with probability `(1 − 1/n)^n` when the parent is
/// desired.
pub fn run_ea0(spec: &Ea0Spec) -> Result<TimeStats> {
    spec.validate()?;
    let outcomes = (0..spec.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(mix64(spec.seed, r));
            let trace = ea0_trajectory(spec, &mut rng).expect("validated");
            ((trace.len() - 1) as u64, true)
        })
        .collect();
    Ok(TimeStats::collect(outcomes))
}

/// Statistics of T̃_i: iterations until some member has fitness above `i`,
/// starting from one member at fitness `i` and `μ − 1` one level below.
/// Replicate `r` uses seed `mix64(config.seed, r)`; runs stop at
/// `config.max_iterations`.
pub fn measure_level_time(config: &EaConfig, f: &FitnessFn, i: usize, replicates: usize) -> Result<TimeStats> {
    config.validate()?;
    if f.n() != config.n {
        return Err(crate::Error::DimensionMismatch {
            expected: config.n,
            got: f.n(),
        });
    }
    if i + 1 > config.n {
        return Err(invalid(format!("need 0 <= i <= n-1, got i={i}, n={}", config.n)));
    }
    if replicates == 0 {
        return Err(invalid("replicates must be >= 1"));
    }
    let outcomes = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let members = plateau_population(f, config.mu, 1, i);
            let mut engine =
                Engine::with_population(config, f, members, rng_from_seed(mix64(config.seed, r))).expect("validated");
            while engine.population().best_fitness() <= i as i64 {
                if engine.iteration() >= config.max_iterations {
                    return (engine.iteration(), false);
                }
                engine.step();
            }
            (engine.iteration(), true)
        })
        .collect();
    Ok(TimeStats::collect(outcomes))
}
