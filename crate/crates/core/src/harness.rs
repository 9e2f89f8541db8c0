//! Parameter sweeps, ratio fits, dominance comparisons and serialization.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bounds::master_bound;
use crate::config_file::KeyValues;
use crate::engine::{default_budget, run_batch, EaConfig, RunResult, TiePolicy, Variant};
use crate::error::{invalid, Error, Result};
use crate::genotype::{FitnessFn, MutationRate};
use crate::seed::mix64;
use crate::stats::SampleStats;

/// Benchmark selector for sweeps (the dimension comes from the grid).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessChoice {
    OneMax,
    MultiOptOneMax { k: usize },
}

impl FitnessChoice {
    pub fn build(&self, n: usize) -> Result<FitnessFn> {
        match *self {
            FitnessChoice::OneMax => Ok(FitnessFn::onemax(n)),
            FitnessChoice::MultiOptOneMax { k } => FitnessFn::multi_opt_onemax(n, k),
        }
    }
}

impl FromStr for FitnessChoice {
    type Err = Error;

    /// `onemax` or `multi:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "onemax" {
            return Ok(FitnessChoice::OneMax);
        }
        if let Some(k) = s.strip_prefix("multi:") {
            let k = k.parse().map_err(|_| Error::Parse(format!("invalid k in {s:?}")))?;
            return Ok(FitnessChoice::MultiOptOneMax { k });
        }
        Err(Error::Parse(format!("unknown fitness {s:?}; expected onemax or multi:<k>")))
    }
}

/// Grid `ns × mus × lambdas` of configurations sharing one variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub ns: Vec<usize>,
    pub mus: Vec<usize>,
    pub lambdas: Vec<usize>,
    /// Explicit (μ, λ) pairs; when non-empty they replace `mus × lambdas`.
    pub pairs: Vec<(usize, usize)>,
    pub variant: Variant,
    pub fitness: FitnessChoice,
    pub replicates: usize,
    pub master_seed: u64,
    pub budget_mult: f64,
    pub tie_policy: TiePolicy,
    pub c: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            ns: Vec::new(),
            mus: vec![1],
            lambdas: vec![1],
            pairs: Vec::new(),
            variant: Variant::Plus,
            fitness: FitnessChoice::OneMax,
            replicates: 100,
            master_seed: 0,
            budget_mult: 10.0,
            tie_policy: TiePolicy::default(),
            c: 1.0,
        }
    }
}

impl SweepSpec {
    /// Reads a spec from a flat key-value file. Recognized keys: `ns`, `mus`,
    /// `lambdas`, `pairs` (`mu:lambda` list), `variant`, `fitness`,
    /// `replicates`, `seed`, `budget_mult`, `tie_policy`, `c`.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        const KNOWN: &[&str] = &[
            "ns", "mus", "lambdas", "pairs", "variant", "fitness", "replicates", "seed", "budget_mult", "tie_policy", "c",
        ];
        if let Some(unknown) = kv.keys().find(|k| !KNOWN.contains(k)) {
            return Err(Error::Parse(format!("unknown key {unknown:?}")));
        }
        let mut spec = SweepSpec::default();
        if let Some(ns) = kv.list("ns")? {
            spec.ns = ns;
        }
        if let Some(mus) = kv.list("mus")? {
            spec.mus = mus;
        }
        if let Some(lambdas) = kv.list("lambdas")? {
            spec.lambdas = lambdas;
        }
        if let Some(pairs) = kv.list::<String>("pairs")? {
            spec.pairs = pairs.iter().map(|p| parse_pair(p)).collect::<Result<_>>()?;
        }
        if let Some(v) = kv.parsed("variant")? {
            spec.variant = v;
        }
        if let Some(v) = kv.parsed("fitness")? {
            spec.fitness = v;
        }
        if let Some(v) = kv.parsed("replicates")? {
            spec.replicates = v;
        }
        if let Some(v) = kv.parsed("seed")? {
            spec.master_seed = v;
        }
        if let Some(v) = kv.parsed("budget_mult")? {
            spec.budget_mult = v;
        }
        if let Some(v) = kv.parsed("tie_policy")? {
            spec.tie_policy = v;
        }
        if let Some(v) = kv.parsed("c")? {
            spec.c = v;
        }
        Ok(spec)
    }

    /// Grid points `(n, μ, λ)` in row order: n-major, then the (μ, λ) pairs.
    pub fn grid(&self) -> Vec<(usize, usize, usize)> {
        let pairs: Vec<(usize, usize)> = if self.pairs.is_empty() {
            self.mus.iter().flat_map(|&mu| self.lambdas.iter().map(move |&l| (mu, l))).collect()
        } else {
            self.pairs.clone()
        };
        self.ns.iter().flat_map(|&n| pairs.iter().map(move |&(mu, l)| (n, mu, l))).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid().is_empty() {
            return Err(invalid("sweep grid is empty"));
        }
        if self.replicates == 0 {
            return Err(invalid("replicates must be >= 1"));
        }
        if !(self.budget_mult.is_finite() && self.budget_mult > 0.0) {
            return Err(invalid(format!("budget multiplier must be positive, got {}", self.budget_mult)));
        }
        MutationRate::new(self.c)?;
        Ok(())
    }

    /// Config of grid cell `index`, seeded with `mix64(master_seed, index)`.
    pub fn cell_config(&self, index: usize, n: usize, mu: usize, lambda: usize) -> Result<EaConfig> {
        if n < 2 {
            return Err(invalid(format!("n must be >= 2 in sweeps, got {n}")));
        }
        let config = EaConfig::new(n, mu, lambda, self.variant)
            .with_rate(MutationRate::new(self.c)?)
            .with_tie_policy(self.tie_policy)
            .with_seed(mix64(self.master_seed, index as u64))
            .with_traces(false);
        config.validate()?;
        let budget = default_budget(n, mu, lambda, self.budget_mult);
        Ok(config.with_budget(budget))
    }
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("pair {s:?} must be mu:lambda")))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| Error::Parse(format!("pair {s:?}: {e}")));
    Ok((parse(a)?, parse(b)?))
}

/// One sweep cell. Statistics cover the completed runs only; exhausted runs
/// are censored and counted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub mu: usize,
    pub lambda: usize,
    pub variant: Variant,
    pub replicates: usize,
    pub mean_t: f64,
    pub stderr_t: f64,
    pub median_t: f64,
    pub q10: f64,
    pub q90: f64,
    pub exhausted: usize,
    pub bound_total: f64,
    pub ratio: f64,
    /// Validation failure of this grid point; such rows carry no statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Row {
    pub fn from_results(n: usize, mu: usize, lambda: usize, variant: Variant, results: &[RunResult]) -> Self {
        let completed: Vec<u64> = results.iter().filter_map(|r| r.iterations_to_opt).collect();
        let stats = SampleStats::from_counts(&completed);
        let bound_total = master_bound(n as f64, mu as f64, lambda as f64).total;
        Row {
            n,
            mu,
            lambda,
            variant,
            replicates: results.len(),
            mean_t: stats.mean,
            stderr_t: stats.stderr,
            median_t: stats.median,
            q10: stats.q10,
            q90: stats.q90,
            exhausted: results.len() - completed.len(),
            bound_total,
            ratio: stats.mean / bound_total,
            error: None,
        }
    }

    fn failed(n: usize, mu: usize, lambda: usize, variant: Variant, error: &Error) -> Self {
        let bound_total = if n >= 2 && mu >= 1 && lambda >= 1 {
            master_bound(n as f64, mu as f64, lambda as f64).total
        } else {
            f64::NAN
        };
        Row {
            n,
            mu,
            lambda,
            variant,
            replicates: 0,
            mean_t: f64::NAN,
            stderr_t: f64::NAN,
            median_t: f64::NAN,
            q10: f64::NAN,
            q90: f64::NAN,
            exhausted: 0,
            bound_total,
            ratio: f64::NAN,
            error: Some(error.to_string()),
        }
    }

    /// Usable for ratio fits: no error, at least one completed run, none exhausted.
    pub fn is_valid(&self) -> bool {
        self.error.is_none() && self.replicates > 0 && self.exhausted == 0 && self.ratio.is_finite() && self.ratio > 0.0
    }

    /// True when the mean falls outside `[q10, q90]`.
    pub fn skew_warned(&self) -> bool {
        !(self.q10 <= self.mean_t && self.mean_t <= self.q90)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub rows: Vec<Row>,
}

/// Runs every grid point; invalid points become error rows.
pub fn sweep(spec: &SweepSpec) -> Result<ExperimentTable> {
    spec.validate()?;
    let rows = spec
        .grid()
        .into_iter()
        .enumerate()
        .map(|(index, (n, mu, lambda))| {
            let outcome = spec.cell_config(index, n, mu, lambda).and_then(|config| {
                let f = spec.fitness.build(n)?;
                run_batch(&config, &f, spec.replicates)
            });
            match outcome {
                Ok(results) => Row::from_results(n, mu, lambda, spec.variant, &results),
                Err(e) => Row::failed(n, mu, lambda, spec.variant, &e),
            }
        })
        .collect();
    Ok(ExperimentTable { rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioFit {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max_ratio / min_ratio`.
    pub spread: f64,
    pub rows_used: usize,
}

/// Spread of `mean_T / bound_total` over the valid rows.
pub fn fit_ratio(table: &ExperimentTable) -> Result<RatioFit> {
    if table.rows.len() < 2 {
        return Err(invalid(format!("ratio fit needs at least 2 rows, got {}", table.rows.len())));
    }
    let ratios: Vec<f64> = table.rows.iter().filter(|r| r.is_valid()).map(|r| r.ratio).collect();
    if ratios.is_empty() {
        return Err(Error::NoData("every row is exhausted or invalid".into()));
    }
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RatioFit {
        min_ratio,
        max_ratio,
        spread: max_ratio / min_ratio,
        rows_used: ratios.len(),
    })
}

/// Comparison of the iteration counts of two configurations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub variant_a: Variant,
    pub variant_b: Variant,
    pub replicates: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    /// `mean_a − mean_b`.
    pub mean_diff: f64,
    /// `sqrt(se_a² + se_b²)`.
    pub pooled_se: f64,
    pub exhausted_a: usize,
    pub exhausted_b: usize,
    /// Mann–Whitney U statistic of sample A.
    pub u_statistic: f64,
    /// One-sided p-value for "A needs fewer iterations than B".
    pub p_value: f64,
}

/// Runs both configurations for `replicates` runs and compares their
/// iteration counts. Exhausted runs enter at their budget, which only
/// understates their runtime.
pub fn compare_dominance(a: &EaConfig, b: &EaConfig, f: &FitnessFn, replicates: usize) -> Result<DominanceReport> {
    if (a.n, a.mu, a.lambda) != (b.n, b.mu, b.lambda) {
        return Err(invalid("dominance comparison needs equal n, mu and lambda"));
    }
    let ra = run_batch(a, f, replicates)?;
    let rb = run_batch(b, f, replicates)?;
    let ta: Vec<f64> = ra.iter().map(|r| r.iterations as f64).collect();
    let tb: Vec<f64> = rb.iter().map(|r| r.iterations as f64).collect();
    let sa = SampleStats::from_samples(&ta);
    let sb = SampleStats::from_samples(&tb);
    let (u, p) = mann_whitney_less(&ta, &tb);
    Ok(DominanceReport {
        variant_a: a.variant,
        variant_b: b.variant,
        replicates,
        mean_a: sa.mean,
        mean_b: sb.mean,
        mean_diff: sa.mean - sb.mean,
        pooled_se: (sa.stderr.powi(2) + sb.stderr.powi(2)).sqrt(),
        exhausted_a: ra.iter().filter(|r| r.budget_exhausted()).count(),
        exhausted_b: rb.iter().filter(|r| r.budget_exhausted()).count(),
        u_statistic: u,
        p_value: p,
    })
}

/// Mann–Whitney U of `a` against `b` with the normal approximation (tie and
/// continuity corrected). Returns `(U_a, p)` where `p` is the one-sided
/// p-value for `a` being stochastically smaller.
pub fn mann_whitney_less(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut all: Vec<(f64, bool)> = a.iter().map(|&x| (x, true)).chain(b.iter().map(|&x| (x, false))).collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let total = all.len();
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < total {
        let mut j = i;
        while j + 1 < total && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        let tied = (j - i + 1) as f64;
        tie_term += tied.powi(3) - tied;
        rank_sum_a += all[i..=j].iter().filter(|(_, from_a)| *from_a).count() as f64 * avg_rank;
        i = j + 1;
    }
    let u = rank_sum_a - na * (na + 1.0) / 2.0;
    let n = na + nb;
    let mean = na * nb / 2.0;
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(var > 0.0) {
        return (u, 0.5);
    }
    let z = (u - mean + 0.5) / var.sqrt();
    let p = Normal::standard().cdf(z);
    (u, p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse(format!("unknown format {other:?}"))),
        }
    }
}

pub const CSV_COLUMNS: [&str; 13] = [
    "n",
    "mu",
    "lambda",
    "variant",
    "replicates",
    "mean_T",
    "stderr_T",
    "median_T",
    "q10",
    "q90",
    "exhausted",
    "bound_total",
    "ratio",
];

/// Serializes a table. CSV writes the fixed header and one line per row
/// with `\n` line endings; floats use the shortest round-tripping decimal
/// form, so CSV and JSON carry identical values.
pub fn emit(table: &ExperimentTable, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => {
            let mut writer = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            writer.write_record(CSV_COLUMNS).expect("in-memory write");
            for r in &table.rows {
                writer
                    .write_record([
                        r.n.to_string(),
                        r.mu.to_string(),
                        r.lambda.to_string(),
                        r.variant.to_string(),
                        r.replicates.to_string(),
                        r.mean_t.to_string(),
                        r.stderr_t.to_string(),
                        r.median_t.to_string(),
                        r.q10.to_string(),
                        r.q90.to_string(),
                        r.exhausted.to_string(),
                        r.bound_total.to_string(),
                        r.ratio.to_string(),
                    ])
                    .expect("in-memory write");
            }
            writer.into_inner().expect("in-memory flush")
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(table).expect("table serializes");
            out.push(b'\n');
            out
        }
    }
}

/// Parses the CSV produced by [`emit`]. Error messages of failed rows are
/// not part of the CSV; such rows come back with `replicates = 0`.
pub fn parse_csv(text: &str) -> Result<ExperimentTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let field = |i: usize| &record[i];
        let int = |i: usize| {
            field(i)
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("row {}: {}: {e}", line + 1, CSV_COLUMNS[i])))
        };
        let float = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {}: {e}", line + 1, CSV_COLUMNS[i])))
        };
        let replicates = int(4)?;
        rows.push(Row {
            n: int(0)?,
            mu: int(1)?,
            lambda: int(2)?,
            variant: field(3).parse()?,
            replicates,
            mean_t: float(5)?,
            stderr_t: float(6)?,
            median_t: float(7)?,
            q10: float(8)?,
            q90: float(9)?,
            exhausted: int(10)?,
            bound_total: float(11)?,
            ratio: float(12)?,
            error: (replicates == 0).then(|| "failed grid point".to_string()),
        });
    }
    Ok(ExperimentTable { rows })
}
