//! Runtime laboratory for the (μ+λ) evolutionary algorithm family.
//!
//! The crate runs the elitist (μ+λ) EA, the non-elitist (μ,λ) EA and the
//! fair-parent (λ 1:1 + λ) EA on OneMax-style benchmarks, measures takeover
//! and level-leaving times, evaluates the closed-form runtime bounds those
//! measurements are compared against, and probes the complete-tree
//! construction behind the lower bounds.
//!
//! Every stochastic entry point takes an explicit seed or RNG; batches derive
//! per-replicate seeds with [`seed::mix64`] so results do not depend on the
//! degree of parallelism.

pub mod bounds;
pub mod config_file;
pub mod engine;
pub mod error;
pub mod genotype;
pub mod harness;
pub mod seed;
pub mod stats;
pub mod takeover;
pub mod tree;

pub use bounds::{master_bound, BoundReport, PhaseParams, Regime};
pub use engine::{run, run_batch, EaConfig, Engine, Member, Population, RunResult, TiePolicy, Variant};
pub use error::{Error, Result};
pub use genotype::{mutate, BitString, FitnessFn, FitnessKind, MutationRate};
pub use harness::{compare_dominance, emit, fit_ratio, sweep, ExperimentTable, Format, RatioFit, Row, SweepSpec};
pub use stats::SampleStats;
pub use takeover::{measure_level_time, measure_takeover, run_ea0, Ea0Spec, TakeoverSpec, TimeStats};

/// The RNG used for every simulation in the crate.
pub type SimRng = rand_chacha::ChaCha8Rng;
