//! Exact reference values computed independently of the library.

#![allow(dead_code)]

pub mod checks;

pub fn choose(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

pub fn binomial_pmf(n: usize, p: f64, k: usize) -> f64 {
    choose(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Distribution of the OneMax value after standard-bit mutation with rate `p`
/// of a string with `k` ones, by summing over (#ones flipped, #zeros flipped).
pub fn onemax_transition(n: usize, k: usize, p: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for a in 0..=k {
        let pa = binomial_pmf(k, p, a);
        for b in 0..=(n - k) {
            out[k - a + b] += pa * binomial_pmf(n - k, p, b);
        }
    }
    out
}

/// Expected iterations of the (1+1) EA on OneMax from a uniform random start,
/// by back-substitution over the absorbing fitness-level chain.
pub fn one_plus_one_onemax(n: usize) -> f64 {
    let p = 1.0 / n as f64;
    let mut expected = vec![0.0; n + 1];
    for k in (0..n).rev() {
        let row = onemax_transition(n, k, p);
        let leave: f64 = row[k + 1..].iter().sum();
        let onward: f64 = (k + 1..=n).map(|j| row[j] * expected[j]).sum();
        expected[k] = (1.0 + onward) / leave;
    }
    (0..=n).map(|k| choose(n, k) / 2f64.powi(n as i32) * expected[k]).sum()
}

/// Expected hitting time of `j2` for the copy-only process on counts: from
/// `j`, the next count is `min(mu, j + Bin(lambda, j (1-1/n)^n / mu))`.
pub fn ea0_expected(n: usize, mu: usize, lambda: usize, j1: usize, j2: usize) -> f64 {
    let copy = (1.0 - 1.0 / n as f64).powi(n as i32);
    let mut expected = vec![0.0; mu + 1];
    for j in (j1..j2).rev() {
        let q = j as f64 * copy / mu as f64;
        let stay = binomial_pmf(lambda, q, 0);
        let mut onward = 0.0;
        for born in 1..=lambda {
            let next = (j + born).min(mu);
            if next < j2 {
                onward += binomial_pmf(lambda, q, born) * expected[next];
            }
        }
        expected[j] = (1.0 + onward) / (1.0 - stay);
    }
    expected[j1]
}

/// Takeover from one fit individual with μ = λ = 2 on OneMax at level `i`.
/// The state never changes until some offspring reaches fitness ≥ i: the fit
/// parent survives and the other slot stays at level i − 1. Each offspring
/// picks a parent uniformly and succeeds with the mutation probability of
/// landing at ≥ i from its parent's level.
pub fn takeover_mu2_lambda2(n: usize, i: usize) -> f64 {
    let p = 1.0 / n as f64;
    let from_fit: f64 = onemax_transition(n, i, p)[i..].iter().sum();
    let from_filler: f64 = onemax_transition(n, i - 1, p)[i..].iter().sum();
    let per_offspring = 0.5 * from_fit + 0.5 * from_filler;
    1.0 / (1.0 - (1.0 - per_offspring).powi(2))
}

/// Expected time to leave level n−1 for the (1+1) EA: a geometric wait for
/// the single improving flip.
pub fn top_level_time(n: usize) -> f64 {
    let nf = n as f64;
    1.0 / ((1.0 / nf) * (1.0 - 1.0 / nf).powi(n as i32 - 1))
}

/// Probability that one standard-bit mutation with rate `1/n` maps a string
/// to a specific target at Hamming distance `h`.
pub fn single_mutation_hit(n: usize, h: usize) -> f64 {
    let p = 1.0 / n as f64;
    p.powi(h as i32) * (1.0 - p).powi((n - h) as i32)
}

pub fn approx_rel(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}
