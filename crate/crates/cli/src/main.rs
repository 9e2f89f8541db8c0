use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ealab::bounds::{level_bound_fast, level_bound_general, minimize_over_mu0, sudholt_bound, takeover_bound_fast,
                    takeover_bound_general, PhaseParams};
use ealab::config_file::KeyValues;
use ealab::engine::default_budget;
use ealab::harness::{compare_dominance, emit, fit_ratio, parse_csv, sweep, FitnessChoice, Format, Row, SweepSpec};
use ealab::seed::rng_from_seed;
use ealab::tree::{count_at_distance, p_opt, q_opt_bound, verify_p_opt};
use ealab::{master_bound, run_batch, BitString, Ea0Spec, EaConfig, ExperimentTable, MutationRate, TakeoverSpec,
            TiePolicy, Variant};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "ealab", version, about = "Runtime experiments for the (mu+lambda) EA family")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed [default: 0].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Independent runs per configuration.
    #[arg(long, global = true)]
    replicates: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long, global = true, default_value = "csv", value_parser = parse_format)]
    format: Format,
    /// Iteration budget as a multiple of the master bound [default: 10].
    #[arg(long, global = true)]
    budget_mult: Option<f64>,
}

impl Global {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn budget_mult(&self) -> f64 {
        self.budget_mult.unwrap_or(10.0)
    }
}

#[derive(Args, Clone)]
struct EaArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    mu: usize,
    #[arg(long, default_value_t = 1)]
    lambda: usize,
    /// plus, comma or fair-plus.
    #[arg(long, default_value = "plus")]
    variant: Variant,
    /// onemax or multi:<k>.
    #[arg(long, default_value = "onemax")]
    fitness: FitnessChoice,
    /// Mutation rate is c/n.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// offspring-first or uniform.
    #[arg(long, default_value = "offspring-first")]
    tie_policy: TiePolicy,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and summarize it as a one-row table.
    Run(EaArgs),
    /// Run a grid of configurations.
    Sweep(SweepArgs),
    /// Measure takeover times from a plateau population.
    Takeover {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        mu: usize,
        #[arg(long)]
        lambda: usize,
        #[arg(long)]
        i: usize,
        #[arg(long, default_value_t = 1)]
        j1: usize,
        /// Defaults to mu.
        #[arg(long)]
        j2: Option<usize>,
        #[arg(long, default_value = "offspring-first")]
        tie_policy: TiePolicy,
    },
    /// Simulate the copy-only process on counts.
    Ea0 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        mu: usize,
        #[arg(long)]
        lambda: usize,
        #[arg(long, default_value_t = 1)]
        j1: usize,
        /// Defaults to mu.
        #[arg(long)]
        j2: Option<usize>,
    },
    /// Evaluate the runtime bounds.
    Bounds {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        lambda: f64,
        /// Also report the takeover bounds for j1 -> j2.
        #[arg(long, requires = "j2")]
        j1: Option<u64>,
        #[arg(long, requires = "j1")]
        j2: Option<u64>,
        /// Also report the level bounds at level i (minimized over mu0).
        #[arg(long)]
        i: Option<u64>,
        /// Aligned text instead of --format.
        #[arg(long)]
        text: bool,
    },
    /// Complete-tree counts, label-probability check and union bound.
    Tree {
        #[arg(long)]
        t: u32,
        #[arg(long)]
        lambda: u32,
        #[arg(long)]
        n: usize,
        /// Mutation chain length for the label check; defaults to t.
        #[arg(long)]
        ell: Option<u64>,
        /// Hamming distance of root and target; defaults to ceil(n/4).
        #[arg(long)]
        hamming: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Population size for the union bound.
        #[arg(long, default_value_t = 1)]
        mu: u32,
    },
    /// Compare two variants on the same n, mu and lambda.
    Dominance {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        mu: usize,
        #[arg(long)]
        lambda: usize,
        #[arg(long, default_value = "plus")]
        variant_a: Variant,
        #[arg(long, default_value = "comma")]
        variant_b: Variant,
        #[arg(long, default_value = "onemax")]
        fitness: FitnessChoice,
    },
    /// Ratio fit over a sweep table in CSV form.
    Fit {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Key-value file; command-line flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    mus: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<usize>>,
    /// Explicit mu:lambda pairs replacing the mus x lambdas product.
    #[arg(long, value_delimiter = ',')]
    pairs: Option<Vec<String>>,
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    fitness: Option<FitnessChoice>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    tie_policy: Option<TiePolicy>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: ealab::Error| e.to_string())
}

enum Failure {
    Validation(String),
    Io(String),
    Exhausted { out: Vec<u8>, msg: String },
}

impl From<ealab::Error> for Failure {
    fn from(e: ealab::Error) -> Self {
        match e {
            ealab::Error::NoData(msg) => Failure::Exhausted {
                out: Vec::new(),
                msg: format!("no data: {msg}"),
            },
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<Vec<u8>, Failure>;

fn exhausted(out: Vec<u8>) -> Failure {
    Failure::Exhausted {
        out,
        msg: "every run exhausted its budget".into(),
    }
}

/// One flat record as CSV (header plus one line) or JSON.
fn emit_record(record: &Value, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(record).expect("value serializes");
            out.push(b'\n');
            out
        }
        Format::Csv => {
            let fields = record.as_object().cloned().unwrap_or_default();
            let mut header = Vec::new();
            let mut line = Vec::new();
            for (key, value) in fields {
                header.push(key);
                line.push(match value {
                    Value::String(s) => s,
                    Value::Null => String::new(),
                    other => other.to_string(),
                });
            }
            format!("{}\n{}\n", header.join(","), line.join(",")).into_bytes()
        }
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Map<String, Value>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}_{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(_) => {}
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

fn flat(value: Value) -> Value {
    let mut out = Map::new();
    flatten("", &value, &mut out);
    Value::Object(out)
}

fn build_config(args: &EaArgs, global: &Global) -> Result<EaConfig, Failure> {
    if args.n < 2 {
        return Err(Failure::Validation(format!("n must be >= 2, got {}", args.n)));
    }
    let config = EaConfig::new(args.n, args.mu, args.lambda, args.variant)
        .with_rate(MutationRate::new(args.c)?)
        .with_tie_policy(args.tie_policy)
        .with_seed(global.seed())
        .with_traces(false);
    config.validate()?;
    let mult = global.budget_mult();
    if !(mult.is_finite() && mult > 0.0) {
        return Err(Failure::Validation(format!("budget multiplier must be positive, got {mult}")));
    }
    Ok(config.with_budget(default_budget(args.n, args.mu, args.lambda, mult)))
}

fn cmd_run(args: &EaArgs, global: &Global) -> Outcome {
    let config = build_config(args, global)?;
    let f = args.fitness.build(args.n)?;
    let results = run_batch(&config, &f, global.replicates.unwrap_or(100))?;
    let table = ExperimentTable {
        rows: vec![Row::from_results(args.n, args.mu, args.lambda, args.variant, &results)],
    };
    finish_table(&table, global.format)
}

fn finish_table(table: &ExperimentTable, format: Format) -> Outcome {
    let out = emit(table, format);
    let attempted: Vec<&Row> = table.rows.iter().filter(|r| r.error.is_none()).collect();
    if !attempted.is_empty() && attempted.iter().all(|r| r.exhausted == r.replicates) {
        return Err(exhausted(out));
    }
    Ok(out)
}

fn cmd_sweep(args: &SweepArgs, global: &Global) -> Outcome {
    let mut spec = match &args.config {
        Some(path) => SweepSpec::from_key_values(&KeyValues::parse(&fs::read_to_string(path)?)?)?,
        None => SweepSpec::default(),
    };
    if let Some(ns) = &args.ns {
        spec.ns = ns.clone();
    }
    if let Some(mus) = &args.mus {
        spec.mus = mus.clone();
    }
    if let Some(lambdas) = &args.lambdas {
        spec.lambdas = lambdas.clone();
    }
    if let Some(pairs) = &args.pairs {
        spec.pairs = pairs
            .iter()
            .map(|p| {
                let (a, b) = p
                    .split_once(':')
                    .ok_or_else(|| Failure::Validation(format!("pair {p:?} must be mu:lambda")))?;
                let parse = |x: &str| x.parse::<usize>().map_err(|e| Failure::Validation(format!("pair {p:?}: {e}")));
                Ok((parse(a)?, parse(b)?))
            })
            .collect::<Result<_, Failure>>()?;
    }
    if let Some(v) = args.variant {
        spec.variant = v;
    }
    if let Some(f) = args.fitness {
        spec.fitness = f;
    }
    if let Some(c) = args.c {
        spec.c = c;
    }
    if let Some(t) = args.tie_policy {
        spec.tie_policy = t;
    }
    if let Some(r) = global.replicates {
        spec.replicates = r;
    }
    if let Some(seed) = global.seed {
        spec.master_seed = seed;
    }
    if let Some(mult) = global.budget_mult {
        spec.budget_mult = mult;
    }
    let table = sweep(&spec)?;
    finish_table(&table, global.format)
}

fn cmd_bounds(n: f64, mu: f64, lambda: f64, j: Option<(u64, u64)>, i: Option<u64>, text: bool, global: &Global) -> Outcome {
    if !(n >= 2.0 && mu >= 1.0 && lambda >= 1.0) {
        return Err(Failure::Validation(format!("need n >= 2, mu >= 1, lambda >= 1; got n={n}, mu={mu}, lambda={lambda}")));
    }
    let report = master_bound(n, mu, lambda);
    if text {
        let mut out = report.to_text();
        if !out.ends_with('\n') {
            out.push('\n');
        }
        return Ok(out.into_bytes());
    }
    let mut value = serde_json::to_value(report).expect("report serializes");
    let obj = value.as_object_mut().expect("object");
    if let Ok(phases) = PhaseParams::new(n, mu, lambda) {
        obj.insert("phases".into(), serde_json::to_value(phases).expect("serializes"));
    }
    if mu.fract() == 0.0 {
        obj.insert("sudholt".into(), json!(sudholt_bound(mu as u64, lambda)?));
    }
    if let Some((j1, j2)) = j {
        obj.insert("takeover_general".into(), json!(takeover_bound_general(mu, lambda, j1, j2)?));
        obj.insert("takeover_fast".into(), json!(takeover_bound_fast(mu, lambda, j1, j2).ok()));
    }
    if let Some(i) = i {
        let (mu0, general) = minimize_over_mu0(mu, |m0| level_bound_general(n, mu, lambda, i, m0))?;
        obj.insert("level_general".into(), json!({ "mu0": mu0, "value": general }));
        if let Ok((mu0, fast)) = minimize_over_mu0(mu, |m0| level_bound_fast(n, mu, lambda, i, m0)) {
            obj.insert("level_fast".into(), json!({ "mu0": mu0, "value": fast }));
        }
    }
    let value = match global.format {
        Format::Csv => flat(value),
        Format::Json => value,
    };
    Ok(emit_record(&value, global.format))
}

#[allow(clippy::too_many_arguments)]
fn cmd_tree(t: u32, lambda: u32, n: usize, ell: Option<u64>, hamming: Option<usize>, samples: u64, mu: u32, global: &Global) -> Outcome {
    if n < 2 || lambda == 0 || mu == 0 {
        return Err(Failure::Validation("need n >= 2, lambda >= 1 and mu >= 1".into()));
    }
    let ell = ell.unwrap_or(t as u64);
    let hamming = hamming.unwrap_or(n.div_ceil(4));
    if hamming > n {
        return Err(Failure::Validation(format!("hamming distance {hamming} exceeds n={n}")));
    }
    let census: Vec<Value> = (0..=t as u64)
        .map(|l| {
            json!({
                "ell": l,
                "count": count_at_distance(t as u64, lambda as u64, l).to_string(),
                "p_opt": p_opt(l, n),
            })
        })
        .collect();
    let root = BitString::zeros(n);
    let target = BitString::prefix_ones(n, hamming);
    let check = verify_p_opt(&root, &target, ell, samples, &mut rng_from_seed(global.seed()))?;
    let q = q_opt_bound(t as u64, n, mu as f64, lambda as f64);
    match global.format {
        Format::Json => Ok(emit_record(
            &json!({
                "t": t,
                "lambda": lambda,
                "n": n,
                "total_nodes": (lambda as u64 + 1).checked_pow(t).map(|v| v.to_string()),
                "census": census,
                "p_opt_check": check,
                "q_opt": q,
            }),
            Format::Json,
        )),
        Format::Csv => {
            let mut out = String::from("ell,count,p_opt\n");
            for row in census {
                out.push_str(&format!("{},{},{}\n", row["ell"], row["count"].as_str().unwrap(), row["p_opt"]));
            }
            Ok(out.into_bytes())
        }
    }
}

fn run_cli(cli: Cli) -> Outcome {
    let global = &cli.global;
    match &cli.command {
        Command::Run(args) => cmd_run(args, global),
        Command::Sweep(args) => cmd_sweep(args, global),
        Command::Takeover { n, mu, lambda, i, j1, j2, tie_policy } => {
            let mut spec = TakeoverSpec::new(*n, *mu, *lambda, *i, *j1, j2.unwrap_or(*mu))
                .with_replicates(global.replicates.unwrap_or(1000))
                .with_seed(global.seed());
            spec.tie_policy = *tie_policy;
            let stats = ealab::measure_takeover(&spec)?;
            let value = json!({ "n": n, "mu": mu, "lambda": lambda, "i": i, "j1": spec.j1, "j2": spec.j2,
                                "exhausted": stats.exhausted, "stats": stats.stats });
            let out = emit_record(&flat(value), global.format);
            if stats.exhausted == spec.replicates {
                return Err(exhausted(out));
            }
            Ok(out)
        }
        Command::Ea0 { n, mu, lambda, j1, j2 } => {
            let spec = Ea0Spec::new(*n, *mu, *lambda, *j1, j2.unwrap_or(*mu))
                .with_replicates(global.replicates.unwrap_or(1000))
                .with_seed(global.seed());
            let stats = ealab::run_ea0(&spec)?;
            let value = json!({ "n": n, "mu": mu, "lambda": lambda, "j1": spec.j1, "j2": spec.j2,
                                "copy_probability": spec.copy_probability(), "stats": stats.stats });
            Ok(emit_record(&flat(value), global.format))
        }
        Command::Bounds { n, mu, lambda, j1, j2, i, text } => {
            cmd_bounds(*n, *mu, *lambda, j1.zip(*j2), *i, *text, global)
        }
        Command::Tree { t, lambda, n, ell, hamming, samples, mu } => {
            cmd_tree(*t, *lambda, *n, *ell, *hamming, *samples, *mu, global)
        }
        Command::Dominance { n, mu, lambda, variant_a, variant_b, fitness } => {
            let base = EaArgs {
                n: *n,
                mu: *mu,
                lambda: *lambda,
                variant: *variant_a,
                fitness: *fitness,
                c: 1.0,
                tie_policy: TiePolicy::default(),
            };
            let a = build_config(&base, global)?;
            let b = build_config(&EaArgs { variant: *variant_b, ..base }, global)?
                .with_seed(ealab::seed::mix64(global.seed(), 1));
            let f = fitness.build(*n)?;
            let report = compare_dominance(&a, &b, &f, global.replicates.unwrap_or(1000))?;
            Ok(emit_record(&flat(serde_json::to_value(report).expect("serializes")), global.format))
        }
        Command::Fit { input } => {
            let table = parse_csv(&fs::read_to_string(input)?)?;
            let fit = fit_ratio(&table)?;
            Ok(emit_record(&serde_json::to_value(fit).expect("serializes"), global.format))
        }
    }
}

fn write_output(out: &[u8], path: Option<&PathBuf>) -> std::io::Result<()> {
    match path {
        Some(path) => fs::write(path, out),
        None => std::io::stdout().lock().write_all(out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let path = cli.global.out.clone();
    match run_cli(cli) {
        Ok(out) => match write_output(&out, path.as_ref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Exhausted { out, msg }) => {
            if !out.is_empty() {
                let _ = write_output(&out, path.as_ref());
            }
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
