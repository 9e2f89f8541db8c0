//! The (μ+λ), (μ,λ) and (λ 1:1 + λ) evolutionary algorithms.
//!
//! One iteration creates λ offspring by standard-bit mutation and keeps the
//! best μ individuals: out of parents and offspring for the plus variants, out
//! of the offspring alone for the comma variant. The (1+1) EA is the plus
//! variant with `μ = λ = 1`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::master_bound;
use crate::error::{invalid, Error, Result};
use crate::genotype::{mutate, BitString, FitnessFn, MutationRate};
use crate::seed::{mix64, rng_from_seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Elitist: best μ of μ parents plus λ offspring.
    Plus,
    /// Non-elitist: best μ of the λ offspring.
    Comma,
    /// Plus selection with `μ = λ`, every parent mutated exactly once.
    FairPlus,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Plus => "plus",
            Variant::Comma => "comma",
            Variant::FairPlus => "fair-plus",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(Variant::Plus),
            "comma" => Ok(Variant::Comma),
            "fair-plus" | "fairplus" | "fair_plus" => Ok(Variant::FairPlus),
            other => Err(Error::Parse(format!("unknown variant {other:?}"))),
        }
    }
}

/// How selection orders individuals of equal fitness.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Offspring beat parents of equal fitness; remaining ties are random.
    #[default]
    OffspringFirstRandom,
    /// All ties are broken uniformly at random.
    UniformRandom,
}

impl fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TiePolicy::OffspringFirstRandom => "offspring-first",
            TiePolicy::UniformRandom => "uniform",
        })
    }
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "offspring-first" | "offspring-first-random" => Ok(TiePolicy::OffspringFirstRandom),
            "uniform" | "uniform-random" => Ok(TiePolicy::UniformRandom),
            other => Err(Error::Parse(format!("unknown tie policy {other:?}"))),
        }
    }
}

/// Full specification of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EaConfig {
    pub n: usize,
    pub mu: usize,
    pub lambda: usize,
    pub variant: Variant,
    pub rate: MutationRate,
    pub tie_policy: TiePolicy,
    pub max_iterations: u64,
    pub seed: u64,
    /// Record per-iteration best fitness and best count.
    pub record_traces: bool,
}

/// Budget for `multiplier` times the master bound, rounded up.
pub fn default_budget(n: usize, mu: usize, lambda: usize, multiplier: f64) -> u64 {
    let total = master_bound(n as f64, mu as f64, lambda as f64).total;
    ((multiplier * total).ceil() as u64).max(1)
}

impl EaConfig {
    /// Config with `c = 1`, offspring-first ties, seed 0, traces on, and a
    /// budget of ten times the master bound.
    pub fn new(n: usize, mu: usize, lambda: usize, variant: Variant) -> Self {
        let max_iterations = if n >= 2 && mu >= 1 && lambda >= 1 {
            default_budget(n, mu, lambda, 10.0)
        } else {
            1
        };
        EaConfig {
            n,
            mu,
            lambda,
            variant,
            rate: MutationRate::default(),
            tie_policy: TiePolicy::default(),
            max_iterations,
            seed: 0,
            record_traces: true,
        }
    }

    pub fn one_plus_one(n: usize) -> Self {
        Self::new(n, 1, 1, Variant::Plus)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, max_iterations: u64) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_tie_policy(mut self, tie_policy: TiePolicy) -> Self {
        self.tie_policy = tie_policy;
        self
    }

    pub fn with_rate(mut self, rate: MutationRate) -> Self {
        self.rate = rate;
        self
    }

    pub fn with_traces(mut self, record: bool) -> Self {
        self.record_traces = record;
        self
    }

    pub fn mutation_probability(&self) -> f64 {
        self.rate.probability(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n must be positive"));
        }
        if self.mu == 0 || self.lambda == 0 {
            return Err(invalid(format!("mu and lambda must be >= 1, got mu={}, lambda={}", self.mu, self.lambda)));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations must be >= 1"));
        }
        if !(self.rate.c.is_finite() && self.rate.c > 0.0) {
            return Err(invalid(format!("mutation scale must be positive, got {}", self.rate.c)));
        }
        match self.variant {
            Variant::Comma if self.lambda < self.mu => Err(invalid(format!(
                "comma selection needs lambda >= mu, got mu={}, lambda={}",
                self.mu, self.lambda
            ))),
            Variant::FairPlus if self.lambda != self.mu => Err(invalid(format!(
                "fair parent selection needs lambda == mu, got mu={}, lambda={}",
                self.mu, self.lambda
            ))),
            _ => Ok(()),
        }
    }
}

/// A population member with its cached fitness.
///
/// `depth` counts mutations since the initial ancestor; `marked` is an
/// inherited lineage flag used by the takeover experiments.
#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub genotype: BitString,
    pub fitness: i64,
    pub depth: u32,
    pub marked: bool,
}

impl Member {
    pub fn new(genotype: BitString, f: &FitnessFn) -> Result<Self> {
        let fitness = f.evaluate(&genotype)?;
        Ok(Member {
            genotype,
            fitness,
            depth: 0,
            marked: false,
        })
    }

    pub fn marked(mut self) -> Self {
        self.marked = true;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Population {
    members: Vec<Member>,
}

impl Population {
    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn best_fitness(&self) -> i64 {
        self.members.iter().map(|m| m.fitness).max().unwrap_or(i64::MIN)
    }

    /// Number of members whose fitness equals the current best.
    pub fn best_count(&self) -> usize {
        let best = self.best_fitness();
        self.members.iter().filter(|m| m.fitness == best).count()
    }

    pub fn count_at_least(&self, threshold: i64) -> usize {
        self.members.iter().filter(|m| m.fitness >= threshold).count()
    }
}

/// Outcome of a single run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// Iterations until an optimum entered the population; `None` when the
    /// budget ran out first.
    pub iterations_to_opt: Option<u64>,
    /// Iterations actually executed.
    pub iterations: u64,
    /// `μ + λ · iterations`.
    pub evaluations: u64,
    /// Best fitness after initialization and after each iteration.
    pub best_fitness_trace: Vec<i64>,
    /// Number of members at the best fitness, aligned with `best_fitness_trace`.
    pub best_count_trace: Vec<usize>,
    pub hit_optimum: bool,
}

impl RunResult {
    pub fn budget_exhausted(&self) -> bool {
        !self.hit_optimum
    }
}

/// Step-wise driver of one run.
pub struct Engine<'a, R> {
    config: &'a EaConfig,
    f: &'a FitnessFn,
    rng: R,
    p: f64,
    population: Population,
    iteration: u64,
    pool: Vec<(SortKey, Member)>,
}

#[derive(Clone, Copy, Debug)]
struct SortKey {
    fitness: i64,
    offspring: bool,
    noise: u64,
    index: usize,
}

impl SortKey {
    // Descending order of preference.
    fn cmp_for(policy: TiePolicy, a: &SortKey, b: &SortKey) -> Ordering {
        let first = b.fitness.cmp(&a.fitness);
        let first = match policy {
            TiePolicy::OffspringFirstRandom => first.then(b.offspring.cmp(&a.offspring)),
            TiePolicy::UniformRandom => first,
        };
        first.then(a.noise.cmp(&b.noise)).then(a.index.cmp(&b.index))
    }
}

impl<'a, R: Rng> Engine<'a, R> {
    /// Engine with a uniformly random initial population.
    pub fn new(config: &'a EaConfig, f: &'a FitnessFn, mut rng: R) -> Result<Self> {
        Self::check(config, f)?;
        let members = (0..config.mu)
            .map(|_| {
                let genotype = BitString::random(config.n, &mut rng);
                let fitness = f.evaluate_unchecked(&genotype);
                Member {
                    genotype,
                    fitness,
                    depth: 0,
                    marked: false,
                }
            })
            .collect();
        Ok(Self::assemble(config, f, rng, members))
    }

    /// Engine starting from the given population of exactly μ members.
    pub fn with_population(config: &'a EaConfig, f: &'a FitnessFn, members: Vec<Member>, rng: R) -> Result<Self> {
        Self::check(config, f)?;
        if members.len() != config.mu {
            return Err(invalid(format!("initial population has {} members, mu = {}", members.len(), config.mu)));
        }
        for m in &members {
            if f.evaluate(&m.genotype)? != m.fitness {
                return Err(invalid("cached fitness does not match genotype"));
            }
        }
        Ok(Self::assemble(config, f, rng, members))
    }

    fn check(config: &EaConfig, f: &FitnessFn) -> Result<()> {
        config.validate()?;
        if f.n() != config.n {
            return Err(Error::DimensionMismatch {
                expected: config.n,
                got: f.n(),
            });
        }
        Ok(())
    }

    fn assemble(config: &'a EaConfig, f: &'a FitnessFn, rng: R, members: Vec<Member>) -> Self {
        Engine {
            config,
            f,
            rng,
            p: config.mutation_probability(),
            population: Population { members },
            iteration: 0,
            pool: Vec::with_capacity(config.mu + config.lambda),
        }
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn has_optimum(&self) -> bool {
        self.population.members.iter().any(|m| self.f.is_optimal(&m.genotype))
    }

    fn offspring_of(&mut self, parent: usize) -> Member {
        let parent = &self.population.members[parent];
        let genotype = mutate(&parent.genotype, self.p, &mut self.rng);
        Member {
            fitness: self.f.evaluate_unchecked(&genotype),
            genotype,
            depth: parent.depth + 1,
            marked: parent.marked,
        }
    }

    /// Performs one mutation and selection phase.
    pub fn step(&mut self) {
        let mu = self.config.mu;
        let mut offspring = Vec::with_capacity(self.config.lambda);
        match self.config.variant {
            Variant::Plus | Variant::Comma => {
                for _ in 0..self.config.lambda {
                    let parent = self.rng.random_range(0..mu);
                    offspring.push(self.offspring_of(parent));
                }
            }
            Variant::FairPlus => {
                for parent in 0..mu {
                    offspring.push(self.offspring_of(parent));
                }
            }
        }

        let parents = std::mem::take(&mut self.population.members);
        let mut pool = std::mem::take(&mut self.pool);
        pool.clear();
        if self.config.variant != Variant::Comma {
            for m in parents {
                let key = self.key(&m, false);
                pool.push((key, m));
            }
        }
        for m in offspring {
            let key = self.key(&m, true);
            pool.push((key, m));
        }
        for (index, (key, _)) in pool.iter_mut().enumerate() {
            key.index = index;
        }

        let policy = self.config.tie_policy;
        if pool.len() > mu {
            pool.select_nth_unstable_by(mu - 1, |a, b| SortKey::cmp_for(policy, &a.0, &b.0));
        }
        self.population.members = pool.drain(..).take(mu).map(|(_, m)| m).collect();
        self.pool = pool;
        self.iteration += 1;
    }

    fn key(&mut self, m: &Member, offspring: bool) -> SortKey {
        SortKey {
            fitness: m.fitness,
            offspring,
            noise: self.rng.random(),
            index: 0,
        }
    }
}

/// Runs one configuration until an optimum is in the population or the
/// budget is spent. Optimality is checked on the initial population and after
/// every selection phase.
pub fn run(config: &EaConfig, f: &FitnessFn) -> Result<RunResult> {
    let mut engine = Engine::new(config, f, rng_from_seed(config.seed))?;
    let mut fitness_trace = Vec::new();
    let mut count_trace = Vec::new();
    let mut record = |e: &Engine<'_, _>| {
        if config.record_traces {
            fitness_trace.push(e.population().best_fitness());
            count_trace.push(e.population().best_count());
        }
    };
    record(&engine);
    let mut hit = engine.has_optimum();
    while !hit && engine.iteration() < config.max_iterations {
        engine.step();
        record(&engine);
        hit = engine.has_optimum();
    }
    let iterations = engine.iteration();
    Ok(RunResult {
        iterations_to_opt: hit.then_some(iterations),
        iterations,
        evaluations: (config.mu as u64) + (config.lambda as u64) * iterations,
        best_fitness_trace: fitness_trace,
        best_count_trace: count_trace,
        hit_optimum: hit,
    })
}

/// Runs `replicates` independent copies; replicate `r` uses seed
/// `mix64(config.seed, r)`. Output order is replicate order regardless of
/// scheduling.
pub fn run_batch(config: &EaConfig, f: &FitnessFn, replicates: usize) -> Result<Vec<RunResult>> {
    if replicates == 0 {
        return Err(invalid("replicates must be >= 1"));
    }
    config.validate()?;
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut cfg = config.clone();
            cfg.seed = mix64(config.seed, r);
            run(&cfg, f)
        })
        .collect()
}
