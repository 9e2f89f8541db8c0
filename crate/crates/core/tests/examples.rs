mod common;

use common::*;
use ealab::bounds::{fitness_level_sum, level_bound_general, minimize_over_mu0, takeover_bound_general};
use ealab::harness::{compare_dominance, emit, sweep, FitnessChoice, Format, SweepSpec};
use ealab::seed::mix64;
use ealab::takeover::ea0_trajectory;
use ealab::tree::{count_at_distance, simulate_family_tree};
use ealab::*;
use num_traits::ToPrimitive;

fn plus(n: usize, mu: usize, lambda: usize) -> EaConfig {
    EaConfig::new(n, mu, lambda, Variant::Plus)
}

#[test]
fn one_plus_one_n10_matches_chain() {
    let config = EaConfig::one_plus_one(10).with_seed(11).with_traces(false);
    let results = run_batch(&config, &FitnessFn::onemax(10), 10_000).unwrap();
    let t: Vec<u64> = results.iter().map(|r| r.iterations_to_opt.unwrap()).collect();
    let mean = SampleStats::from_counts(&t).mean;
    let exact = one_plus_one_onemax(10);
    assert!(approx_rel(mean, exact, 0.05), "mean {mean}, exact {exact}");
}

#[test]
fn plus_not_slower_than_comma_small() {
    let f = FitnessFn::onemax(10);
    let a = plus(10, 2, 2).with_seed(1).with_traces(false);
    let b = EaConfig::new(10, 2, 2, Variant::Comma)
        .with_seed(2)
        .with_budget(1_000_000)
        .with_traces(false);
    let report = compare_dominance(&a, &b, &f, 10_000).unwrap();
    assert_eq!(report.exhausted_b, 0);
    assert!(report.mean_a <= report.mean_b + 3.0 * report.pooled_se, "{report:?}");
}

#[test]
fn run_batch_seed_derivation() {
    let f = FitnessFn::onemax(20);
    let config = plus(20, 2, 3).with_seed(99);
    let batch = run_batch(&config, &f, 1).unwrap();
    let single = run(&config.clone().with_seed(mix64(99, 0)), &f).unwrap();
    assert_eq!(batch[0], single);

    let again = run_batch(&config, &f, 50).unwrap();
    let twice = run_batch(&config, &f, 50).unwrap();
    assert_eq!(again, twice);

    let tight = plus(20, 2, 3).with_budget(1);
    for r in run_batch(&tight, &f, 100).unwrap() {
        assert!(r.budget_exhausted() || r.iterations_to_opt == Some(0));
        assert!(r.iterations <= 1);
    }
}

#[test]
fn takeover_mu2_lambda2_matches_chain() {
    let stats = measure_takeover(&TakeoverSpec::new(10, 2, 2, 5, 1, 2).with_replicates(20_000).with_seed(5)).unwrap();
    let exact = takeover_mu2_lambda2(10, 5);
    assert_eq!(stats.exhausted, 0);
    assert!(approx_rel(stats.mean(), exact, 0.05), "mean {}, exact {exact}", stats.mean());
}

#[test]
fn takeover_huge_lambda_is_one_step() {
    let (n, mu) = (20, 3);
    let lambda = 10 * mu * n;
    let stats = measure_takeover(&TakeoverSpec::new(n, mu, lambda, 10, 1, 2).with_replicates(500)).unwrap();
    let copy = (1.0 - 1.0 / n as f64).powi(n as i32);
    let geometric_mean = 1.0 / (1.0 - (1.0 - copy / mu as f64).powi(lambda as i32));
    assert!(stats.samples.iter().all(|&t| t >= 1));
    assert!(stats.mean() <= geometric_mean + 3.0 * stats.stderr().max(1e-12));
    assert!((stats.mean() - 1.0).abs() < 1e-9);
}

#[test]
fn takeover_respects_general_bound() {
    for &(n, mu, lambda, i, j1, j2) in &[(30, 4, 4, 15, 1, 4), (30, 8, 2, 10, 2, 7), (40, 5, 50, 39, 1, 5), (20, 6, 6, 0, 1, 6)] {
        let stats = measure_takeover(&TakeoverSpec::new(n, mu, lambda, i, j1, j2).with_replicates(1000)).unwrap();
        let bound = takeover_bound_general(mu as f64, lambda as f64, j1 as u64, j2 as u64).unwrap();
        assert!(stats.mean() <= bound + 3.0 * stats.stderr(), "{n} {mu} {lambda}: {} vs {bound}", stats.mean());
        assert!(stats.samples.iter().all(|&t| t >= 1));
    }
}

#[test]
fn takeover_monotone_in_lambda() {
    let mu = 6;
    let means: Vec<(f64, f64)> = [1, 2, 4, 8]
        .iter()
        .map(|&k| {
            let s = measure_takeover(&TakeoverSpec::new(30, mu, k * mu, 15, 1, mu).with_replicates(2000)).unwrap();
            (s.mean(), s.stderr())
        })
        .collect();
    for w in means.windows(2) {
        assert!(w[1].0 <= w[0].0 + 3.0 * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt(), "{means:?}");
    }
}

#[test]
fn ea0_matches_chain_and_is_monotone() {
    let spec = Ea0Spec::new(20, 4, 4, 1, 4).with_replicates(20_000).with_seed(3);
    let stats = run_ea0(&spec).unwrap();
    let exact = ea0_expected(20, 4, 4, 1, 4);
    assert!(approx_rel(stats.mean(), exact, 0.05), "mean {}, exact {exact}", stats.mean());

    let mut rng = ealab::seed::rng_from_seed(8);
    for _ in 0..200 {
        let trace = ea0_trajectory(&Ea0Spec::new(30, 10, 7, 1, 10), &mut rng).unwrap();
        assert!(trace.windows(2).all(|w| w[0] <= w[1]));
    }

    let last = run_ea0(&Ea0Spec::new(20, 5, 5, 4, 5).with_replicates(500)).unwrap();
    assert!(last.mean().is_finite() && last.mean() >= 1.0);
}

#[test]
fn ea0_growth_lower_bound() {
    let (mu, lambda, j1, j2) = (4usize, 80usize, 1usize, 4usize);
    let stats = run_ea0(&Ea0Spec::new(30, mu, lambda, j1, j2).with_replicates(5000)).unwrap();
    let t = (j2 as f64 / (2.0 * j1 as f64)).ln() / (1.0 + lambda as f64 / (std::f64::consts::E * mu as f64)).ln();
    assert!(stats.mean() >= t - 3.0 * stats.stderr());
}

#[test]
fn level_time_top_level_geometric() {
    let config = EaConfig::one_plus_one(10).with_budget(1_000_000).with_seed(4);
    let stats = measure_level_time(&config, &FitnessFn::onemax(10), 9, 20_000).unwrap();
    let exact = top_level_time(10);
    assert!(approx_rel(stats.mean(), exact, 0.05), "mean {}, exact {exact}", stats.mean());
}

#[test]
fn level_zero_left_at_once() {
    let config = plus(10, 2, 10).with_budget(1000);
    let stats = measure_level_time(&config, &FitnessFn::onemax(10), 0, 2000).unwrap();
    // Every offspring of the all-zero string improves unless no bit flips.
    let p_stall = (0.9f64).powi(100);
    assert!(p_stall < 1e-4);
    assert!(stats.mean() <= 2.0);
}

#[test]
fn level_time_respects_corollary_bound() {
    for &(n, mu, lambda, i) in &[(30, 1, 1, 20), (30, 4, 4, 25), (40, 8, 2, 30), (40, 2, 20, 10)] {
        let config = plus(n, mu, lambda).with_budget(1_000_000);
        let stats = measure_level_time(&config, &FitnessFn::onemax(n), i, 2000).unwrap();
        let (_, bound) =
            minimize_over_mu0(mu as f64, |m0| level_bound_general(n as f64, mu as f64, lambda as f64, i as u64, m0))
                .unwrap();
        assert!(stats.mean() <= bound + 3.0 * stats.stderr(), "{n} {mu} {lambda} {i}: {} vs {bound}", stats.mean());
    }
}

#[test]
fn fitness_level_sum_dominates_one_plus_one() {
    let n = 100;
    let levels: Vec<f64> =
        (0..n).map(|i| level_bound_general(n as f64, 1.0, 1.0, i as u64, 1).unwrap()).collect();
    let total = fitness_level_sum(&levels);
    let config = EaConfig::one_plus_one(n).with_traces(false);
    let results = run_batch(&config, &FitnessFn::onemax(n), 1000).unwrap();
    let t: Vec<u64> = results.iter().map(|r| r.iterations_to_opt.unwrap()).collect();
    let s = SampleStats::from_counts(&t);
    assert!(s.mean <= total + 3.0 * s.stderr, "{} vs {total}", s.mean);
}

#[test]
fn sweep_monotone_in_lambda() {
    let spec = SweepSpec {
        ns: vec![64],
        mus: vec![1],
        lambdas: vec![1, 2, 4, 8],
        replicates: 400,
        master_seed: 17,
        ..SweepSpec::default()
    };
    let table = sweep(&spec).unwrap();
    for w in table.rows.windows(2) {
        let se = (w[0].stderr_t.powi(2) + w[1].stderr_t.powi(2)).sqrt();
        assert!(w[1].mean_t <= w[0].mean_t + 3.0 * se, "{:?}", table.rows);
    }
    for r in &table.rows {
        assert!(r.ratio > 0.0);
        assert!(!r.skew_warned());
    }
}

#[test]
fn one_point_sweep_equals_run_batch() {
    let spec = SweepSpec {
        ns: vec![24],
        mus: vec![3],
        lambdas: vec![5],
        replicates: 40,
        master_seed: 2,
        ..SweepSpec::default()
    };
    let row = sweep(&spec).unwrap().rows.remove(0);
    let config = spec.cell_config(0, 24, 3, 5).unwrap();
    let results = run_batch(&config, &FitnessFn::onemax(24), 40).unwrap();
    let expected = Row::from_results(24, 3, 5, Variant::Plus, &results);
    assert_eq!(row, expected);
}

#[test]
fn sweep_is_reproducible_across_thread_counts() {
    let spec = SweepSpec {
        ns: vec![20, 40],
        mus: vec![1, 4],
        lambdas: vec![1, 8],
        replicates: 30,
        master_seed: 123,
        fitness: FitnessChoice::MultiOptOneMax { k: 2 },
        ..SweepSpec::default()
    };
    let first = emit(&sweep(&spec).unwrap(), Format::Csv);
    let second = emit(&sweep(&spec).unwrap(), Format::Csv);
    assert_eq!(first, second);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| emit(&sweep(&spec).unwrap(), Format::Csv));
    assert_eq!(first, serial);
}

fn significant(x: f64) -> String {
    format!("{x:.14e}")
}

#[test]
fn json_and_csv_carry_the_same_numbers() {
    let spec = SweepSpec {
        ns: vec![16, 32],
        mus: vec![2],
        lambdas: vec![3],
        replicates: 25,
        ..SweepSpec::default()
    };
    let table = sweep(&spec).unwrap();
    let csv_text = String::from_utf8(emit(&table, Format::Csv)).unwrap();
    let json: serde_json::Value = serde_json::from_slice(&emit(&table, Format::Json)).unwrap();
    let json_rows = json["rows"].as_array().unwrap();
    let keys = ["mean_t", "stderr_t", "median_t", "q10", "q90", "bound_total", "ratio"];
    let columns = [5, 6, 7, 8, 9, 11, 12];
    for (line, jrow) in csv_text.lines().skip(1).zip(json_rows) {
        let fields: Vec<&str> = line.split(',').collect();
        for (key, col) in keys.iter().zip(columns) {
            let from_csv: f64 = fields[col].parse().unwrap();
            let from_json = jrow[key].as_f64().unwrap();
            assert_eq!(significant(from_csv), significant(from_json), "{key}");
        }
        assert_eq!(fields[0], jrow["n"].to_string());
    }
}

#[test]
fn dominance_examples() {
    let f = FitnessFn::onemax(30);
    let a = plus(30, 4, 4).with_seed(1).with_traces(false);
    let b = plus(30, 4, 4).with_seed(2).with_traces(false);
    let same = compare_dominance(&a, &b, &f, 2000).unwrap();
    assert!(same.mean_diff.abs() <= 3.0 * same.pooled_se, "{same:?}");

    let f = FitnessFn::onemax(50);
    let p = plus(50, 8, 8).with_traces(false);
    let fair = EaConfig::new(50, 8, 8, Variant::FairPlus).with_seed(9).with_traces(false);
    let report = compare_dominance(&p, &fair, &f, 1000).unwrap();
    let ratio = report.mean_a / report.mean_b;
    assert!((1.0 / 3.0..=3.0).contains(&ratio), "{report:?}");
}

#[test]
fn family_tree_inside_complete_forest() {
    let (n, mu, lambda, t) = (50, 8, 8, 100u64);
    let f = FitnessFn::onemax(n);
    for r in 0..100 {
        let config = plus(n, mu, lambda).with_budget(t).with_seed(mix64(77, r));
        let stats = simulate_family_tree(&config, &f).unwrap();
        assert_eq!(stats.per_iteration.len(), t as usize + 1);
        assert!(stats.per_iteration[0].counts == vec![mu]);
        for census in &stats.per_iteration {
            assert!(census.max_depth as u64 <= census.iteration);
            for (ell, &count) in census.counts.iter().enumerate() {
                let cap = count_at_distance(census.iteration, lambda as u64, ell as u64) * mu as u64;
                assert!(cap.to_f64().unwrap() >= count as f64);
            }
        }
    }
}
