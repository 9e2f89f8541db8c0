//! Acceptance criteria A1–A9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{checks, ea0_expected, one_plus_one_onemax};
use ealab::bounds::{fast_threshold, sudholt_bound, takeover_bound_fast, takeover_bound_general};
use ealab::harness::{fit_ratio, sweep, SweepSpec};
use ealab::seed::{mix64, rng_from_seed};
use ealab::tree::{count_at_distance, verify_p_opt, CompleteTree};
use ealab::*;
use num_traits::ToPrimitive;

type Outcome = std::result::Result<String, String>;

fn a1() -> Outcome {
    let mut notes = Vec::new();
    for (k, n) in [10usize, 25, 50].into_iter().enumerate() {
        let config = EaConfig::one_plus_one(n).with_seed(mix64(1, k as u64)).with_traces(false);
        let results = run_batch(&config, &FitnessFn::onemax(n), 10_000).map_err(|e| e.to_string())?;
        let t: Vec<u64> = results.iter().filter_map(|r| r.iterations_to_opt).collect();
        if t.len() != results.len() {
            return Err(format!("n={n}: {} runs exhausted", results.len() - t.len()));
        }
        let mean = SampleStats::from_counts(&t).mean;
        let exact = one_plus_one_onemax(n);
        let rel = (mean - exact).abs() / exact;
        let note = format!("n={n} mean={mean:.2} exact={exact:.2} rel={rel:.4}");
        if rel > 0.05 {
            return Err(note);
        }
        notes.push(note);
    }
    Ok(notes.join("; "))
}

fn a2() -> Outcome {
    let mut notes = Vec::new();
    for (k, (mu, lambda)) in [(8usize, 8usize), (8, 64), (4, 400)].into_iter().enumerate() {
        let spec = TakeoverSpec::new(50, mu, lambda, 25, 1, mu)
            .with_replicates(1000)
            .with_seed(mix64(2, k as u64));
        let stats = measure_takeover(&spec).map_err(|e| e.to_string())?;
        if stats.exhausted > 0 {
            return Err(format!("({mu},{lambda}): {} runs exhausted", stats.exhausted));
        }
        let upper = stats.mean() - 3.0 * stats.stderr();
        let (muf, lf) = (mu as f64, lambda as f64);
        let mut bounds = vec![
            ("general", takeover_bound_general(muf, lf, 1, mu as u64).map_err(|e| e.to_string())?),
            ("sudholt", sudholt_bound(mu as u64, lf).map_err(|e| e.to_string())?),
        ];
        if lf / muf >= fast_threshold() {
            bounds.push(("fast", takeover_bound_fast(muf, lf, 1, mu as u64).map_err(|e| e.to_string())?));
        }
        let shown: Vec<String> = bounds.iter().map(|(name, b)| format!("{name}={b:.3}")).collect();
        let note = format!("({mu},{lambda}) mean={:.3} se={:.3} {}", stats.mean(), stats.stderr(), shown.join(" "));
        if bounds.iter().any(|&(_, b)| upper > b) {
            return Err(note);
        }
        notes.push(note);
    }
    Ok(notes.join("; "))
}

fn a3() -> Outcome {
    let (mu, lambda, j1, j2) = (16usize, 256usize, 1usize, 16usize);
    let stats = run_ea0(&Ea0Spec::new(50, mu, lambda, j1, j2).with_replicates(10_000).with_seed(3))
        .map_err(|e| e.to_string())?;
    let t = (j2 as f64 / (2.0 * j1 as f64)).ln() / (1.0 + lambda as f64 / (std::f64::consts::E * mu as f64)).ln();
    let lower = format!("mean={:.4} se={:.4} t={t:.4}", stats.mean(), stats.stderr());
    if stats.mean() < t - 3.0 * stats.stderr() {
        return Err(lower);
    }
    let small = run_ea0(&Ea0Spec::new(50, 4, 4, 1, 4).with_replicates(10_000).with_seed(33))
        .map_err(|e| e.to_string())?;
    let exact = ea0_expected(50, 4, 4, 1, 4);
    let rel = (small.mean() - exact).abs() / exact;
    let chain = format!("mu=lambda=4 mean={:.4} exact={exact:.4} rel={rel:.4}", small.mean());
    if rel > 0.05 {
        return Err(format!("{lower}; {chain}"));
    }
    Ok(format!("{lower}; {chain}"))
}

fn a4() -> Outcome {
    let ns = [32usize, 64, 128];
    let mut means = Vec::new();
    for (k, &n) in ns.iter().enumerate() {
        let config = EaConfig::new(n, n, n, Variant::FairPlus)
            .with_seed(mix64(4, k as u64))
            .with_traces(false);
        let results = run_batch(&config, &FitnessFn::onemax(n), 500).map_err(|e| e.to_string())?;
        let t: Vec<u64> = results.iter().filter_map(|r| r.iterations_to_opt).collect();
        if t.len() != results.len() {
            return Err(format!("n={n}: {} runs exhausted", results.len() - t.len()));
        }
        means.push(SampleStats::from_counts(&t).mean);
    }
    let bound = |n: usize| (n as f64).ln() + n as f64;
    let a = means[0] / ns[0] as f64;
    let mut notes = Vec::new();
    let mut ok = true;
    for (k, &n) in ns.iter().enumerate() {
        let per_n = means[k] / n as f64;
        let growth = means[k] / means[0];
        let allowed = 1.5 * bound(n) / bound(ns[0]);
        let in_window = per_n >= a * (1.0 - 1e-12) && per_n <= 4.0 * a;
        ok &= in_window && growth <= allowed;
        notes.push(format!(
            "n={n} mean={:.2} mean/n={per_n:.4} window=[{a:.4},{:.4}] growth={growth:.3}<= {allowed:.3}",
            means[k],
            4.0 * a
        ));
    }
    if ok {
        Ok(notes.join("; "))
    } else {
        Err(notes.join("; "))
    }
}

fn a5() -> Outcome {
    let spec = SweepSpec {
        ns: vec![64, 128, 256],
        pairs: vec![(1, 1), (1, 16), (8, 8), (8, 64), (2, 128)],
        replicates: 300,
        master_seed: 5,
        budget_mult: 10.0,
        ..SweepSpec::default()
    };
    let table = sweep(&spec).map_err(|e| e.to_string())?;
    if let Some(r) = table.rows.iter().find(|r| r.error.is_some() || r.exhausted > 0) {
        return Err(format!("n={} mu={} lambda={}: exhausted={} error={:?}", r.n, r.mu, r.lambda, r.exhausted, r.error));
    }
    let fit = fit_ratio(&table).map_err(|e| e.to_string())?;
    let note = format!(
        "rows={} min_ratio={:.4} max_ratio={:.4} spread={:.3}",
        fit.rows_used, fit.min_ratio, fit.max_ratio, fit.spread
    );
    if fit.rows_used == table.rows.len() && fit.spread <= 20.0 {
        Ok(note)
    } else {
        Err(note)
    }
}

fn a6() -> Outcome {
    let mut builds = 0;
    for t in 0..=4u32 {
        for lambda in 1..=3u32 {
            let tree = CompleteTree::build(t, lambda).map_err(|e| e.to_string())?;
            let total = (lambda as u64 + 1).pow(t);
            if tree.len() as u64 != total {
                return Err(format!("t={t} lambda={lambda}: {} nodes, expected {total}", tree.len()));
            }
            let census = tree.distance_census();
            for ell in 0..=t as u64 {
                let expected = count_at_distance(t as u64, lambda as u64, ell).to_u64().unwrap();
                let got = census.get(ell as usize).copied().unwrap_or(0);
                if got != expected {
                    return Err(format!("t={t} lambda={lambda} ell={ell}: census {got}, expected {expected}"));
                }
            }
            if census.len() != t as usize + 1 {
                return Err(format!("t={t} lambda={lambda}: census has {} distances", census.len()));
            }
            builds += 1;
        }
    }
    Ok(format!("{builds} builds exact"))
}

fn a7() -> Outcome {
    let mut rng = rng_from_seed(7);
    let mut cells = 0;
    let mut worst = f64::NEG_INFINITY;
    for n in [8usize, 12, 16] {
        for ell in [1u64, 2, 4, n as u64 - 1] {
            for h in [n.div_ceil(4), n / 2] {
                let root = BitString::zeros(n);
                let target = BitString::prefix_ones(n, h);
                let check = verify_p_opt(&root, &target, ell, 100_000, &mut rng).map_err(|e| e.to_string())?;
                if !check.within_bound {
                    return Err(format!(
                        "n={n} ell={ell} H={h}: empirical {} > bound {} + 3*{}",
                        check.empirical, check.bound, check.sigma
                    ));
                }
                worst = worst.max(check.empirical - check.bound);
                cells += 1;
            }
        }
    }
    Ok(format!("{cells} cells, max(empirical - bound)={worst:.3e}"))
}

fn a8() -> Outcome {
    let f = FitnessFn::onemax(30);
    let plus = EaConfig::new(30, 3, 30, Variant::Plus).with_seed(81).with_traces(false);
    let comma = EaConfig::new(30, 3, 30, Variant::Comma).with_seed(82).with_traces(false);
    let report = compare_dominance(&plus, &comma, &f, 10_000).map_err(|e| e.to_string())?;
    let note = format!(
        "plus={:.3} comma={:.3} pooled_se={:.3} exhausted={}/{} p={:.3e}",
        report.mean_a, report.mean_b, report.pooled_se, report.exhausted_a, report.exhausted_b, report.p_value
    );
    if report.exhausted_a == 0 && report.exhausted_b == 0 && report.mean_a <= report.mean_b + 3.0 * report.pooled_se {
        Ok(note)
    } else {
        Err(note)
    }
}

fn a9() -> Outcome {
    let traces = checks::elitism_traces(9)?;
    let mut min_p = f64::INFINITY;
    for (k, n) in [2usize, 4, 8, 16, 32].into_iter().enumerate() {
        let p = checks::flip_count_chi_square(n, 100_000, mix64(9, k as u64));
        if p <= 1e-3 {
            return Err(format!("flip counts n={n}: chi-square p={p:.2e}"));
        }
        min_p = min_p.min(p);
    }
    checks::lemma3_pairs(10_000, 9).map_err(|(x, n)| format!("bernoulli bound fails at x={x}, n={n}"))?;
    let (hat, sigma) = checks::lemma2_frequency(100_000, 9);
    if hat <= 0.25 - 3.0 * sigma {
        return Err(format!("Pr[X >= EX]={hat:.4}"));
    }
    Ok(format!(
        "{traces} elitist traces; chi-square min p={min_p:.3}; 10^4 bernoulli pairs; Pr[X >= EX]={hat:.4}"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("A1", a1),
        ("A2", a2),
        ("A3", a3),
        ("A4", a4),
        ("A5", a5),
        ("A6", a6),
        ("A7", a7),
        ("A8", a8),
        ("A9", a9),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{name} PASS ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("{name} FAIL ({secs:.1}s) {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
