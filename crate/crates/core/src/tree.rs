//! Complete trees of potential offspring and the union bounds built on them.
//!
//! In the complete tree every node receives λ new children in every
//! iteration, each labelled by standard-bit mutation of its parent. A run of
//! the (μ+λ) EA realizes a subforest of μ such trees.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::engine::{EaConfig, Engine};
use crate::error::{Error, Result};
use crate::genotype::{mutate, BitString, FitnessFn};
use crate::seed::rng_from_seed;

/// Largest node count an explicit build may produce.
pub const MAX_TREE_NODES: u64 = 1_000_000;
/// Largest total label storage (bits) of a labelled build.
pub const MAX_LABEL_BITS: u64 = 64_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompleteTreeSpec {
    pub t: u32,
    pub lambda: u32,
    pub n: usize,
    pub root_label: BitString,
    pub target: BitString,
}

/// A node `(parent, created_at, child_index)`; the root has no parent and
/// `created_at = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub parent: Option<usize>,
    pub created_at: u32,
    pub child_index: u32,
    pub depth: u32,
    pub label: Option<BitString>,
}

#[derive(Clone, Debug)]
pub struct CompleteTree {
    pub t: u32,
    pub lambda: u32,
    nodes: Vec<Node>,
}

fn node_count(t: u32, lambda: u32) -> Option<u64> {
    (lambda as u64 + 1).checked_pow(t)
}

impl CompleteTree {
    /// Unlabelled tree after `t` iterations.
    pub fn build(t: u32, lambda: u32) -> Result<Self> {
        Self::grow(t, lambda, None::<(&BitString, f64, &mut crate::SimRng)>)
    }

    /// Tree whose labels arise from mutation with rate `1/n` starting at
    /// `spec.root_label`.
    pub fn build_labeled<R: Rng>(spec: &CompleteTreeSpec, rng: &mut R) -> Result<Self> {
        if spec.root_label.len() != spec.n || spec.target.len() != spec.n {
            return Err(Error::DimensionMismatch {
                expected: spec.n,
                got: spec.root_label.len().max(spec.target.len()),
            });
        }
        let nodes = node_count(spec.t, spec.lambda).unwrap_or(u64::MAX);
        if nodes.saturating_mul(spec.n as u64) > MAX_LABEL_BITS {
            return Err(Error::TooLarge(format!("{nodes} labels of {} bits exceed the label guard", spec.n)));
        }
        Self::grow(spec.t, spec.lambda, Some((&spec.root_label, 1.0 / spec.n as f64, rng)))
    }

    fn grow<R: Rng>(t: u32, lambda: u32, mut labels: Option<(&BitString, f64, &mut R)>) -> Result<Self> {
        match node_count(t, lambda) {
            Some(count) if count <= MAX_TREE_NODES => {}
            _ => {
                return Err(Error::TooLarge(format!(
                    "complete tree with t={t}, lambda={lambda} exceeds {MAX_TREE_NODES} nodes"
                )))
            }
        }
        let mut nodes = vec![Node {
            parent: None,
            created_at: 0,
            child_index: 0,
            depth: 0,
            label: labels.as_ref().map(|(root, _, _)| (*root).clone()),
        }];
        for time in 1..=t {
            let existing = nodes.len();
            for parent in 0..existing {
                for child_index in 1..=lambda {
                    let label = labels
                        .as_mut()
                        .map(|(_, p, rng)| mutate(nodes[parent].label.as_ref().expect("labelled"), *p, *rng));
                    let depth = nodes[parent].depth + 1;
                    nodes.push(Node {
                        parent: Some(parent),
                        created_at: time,
                        child_index,
                        depth,
                        label,
                    });
                }
            }
        }
        Ok(CompleteTree { t, lambda, nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of nodes at each distance from the root (index = distance).
    /// Distances are recomputed by walking parent links.
    pub fn distance_census(&self) -> Vec<u64> {
        let mut census = vec![0u64; self.t as usize + 1];
        for node in &self.nodes {
            let mut d = 0;
            let mut cur = node.parent;
            while let Some(p) = cur {
                d += 1;
                cur = self.nodes[p].parent;
            }
            census[d] += 1;
        }
        census
    }

    pub fn count_label(&self, target: &BitString) -> usize {
        self.nodes.iter().filter(|n| n.label.as_ref() == Some(target)).count()
    }
}

/// `C(t, ℓ) λ^ℓ`, the number of nodes at distance `ℓ` after `t` iterations;
/// zero for `ℓ > t`.
pub fn count_at_distance(t: u64, lambda: u64, ell: u64) -> BigUint {
    if ell > t {
        return BigUint::zero();
    }
    binomial(t, ell) * BigUint::from(lambda).pow(ell as u32)
}

fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc = acc * BigUint::from(n - j) / BigUint::from(j + 1);
    }
    acc
}

/// `min{1, (ℓ/(n−1))^{n/4}}`.
pub fn p_opt(ell: u64, n: usize) -> f64 {
    assert!(n >= 2);
    if ell == 0 {
        return 0.0;
    }
    let base = ell as f64 / (n - 1) as f64;
    if base >= 1.0 {
        1.0
    } else {
        base.powf(n as f64 / 4.0)
    }
}

fn ln_p_opt(ell: u64, n: usize) -> f64 {
    if ell == 0 {
        return f64::NEG_INFINITY;
    }
    let base = ell as f64 / (n - 1) as f64;
    if base >= 1.0 {
        0.0
    } else {
        n as f64 / 4.0 * base.ln()
    }
}

/// Monte-Carlo check of the label-probability bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct POptCheck {
    pub ell: u64,
    pub n: usize,
    pub hamming: usize,
    pub samples: u64,
    pub hits: u64,
    pub empirical: f64,
    /// Standard error of `empirical`.
    pub sigma: f64,
    pub bound: f64,
    /// `empirical ≤ bound + 3σ`.
    pub within_bound: bool,
}

/// Applies `ell` successive mutations with rate `1/n` to `root` `samples`
/// times and counts exact hits of `target`. Requires `H(root, target) ≥ n/4`.
pub fn verify_p_opt<R: Rng + ?Sized>(
    root: &BitString,
    target: &BitString,
    ell: u64,
    samples: u64,
    rng: &mut R,
) -> Result<POptCheck> {
    let n = root.len();
    if target.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: target.len(),
        });
    }
    if n < 2 || samples == 0 {
        return Err(crate::error::invalid("need n >= 2 and samples >= 1"));
    }
    let hamming = root.hamming(target);
    if 4 * hamming < n {
        return Err(Error::Premise(format!("Hamming distance {hamming} below n/4 = {}", n as f64 / 4.0)));
    }
    let p = 1.0 / n as f64;
    let mut hits = 0u64;
    for _ in 0..samples {
        let mut x = root.clone();
        for _ in 0..ell {
            x = mutate(&x, p, rng);
        }
        if &x == target {
            hits += 1;
        }
    }
    let empirical = hits as f64 / samples as f64;
    let sigma = (empirical * (1.0 - empirical) / samples as f64).sqrt();
    let bound = p_opt(ell, n);
    Ok(POptCheck {
        ell,
        n,
        hamming,
        samples,
        hits,
        empirical,
        sigma,
        bound,
        within_bound: empirical <= bound + 3.0 * sigma,
    })
}

/// The union bound `μ Σ_{ℓ=0}^{t} C(t,ℓ)(λ/μ)^ℓ p(ℓ,n)` on the probability
/// that an optimum appears within `t` iterations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QOptBound {
    /// Natural log of the raw sum (`-inf` when it is zero).
    pub ln_raw: f64,
    pub raw: f64,
    /// `raw` clamped to `[0, 1]`.
    pub clamped: f64,
}

/// Per-ℓ summands `C(t,ℓ)(λ/μ)^ℓ p(ℓ,n)`, evaluated in log space.
pub fn q_opt_summands(t: u64, n: usize, mu: f64, lambda: f64) -> Vec<f64> {
    (0..=t).map(|ell| ln_summand(t, ell, n, mu, lambda).exp()).collect()
}

fn ln_summand(t: u64, ell: u64, n: usize, mu: f64, lambda: f64) -> f64 {
    ln_binomial(t, ell) + ell as f64 * (lambda / mu).ln() + ln_p_opt(ell, n)
}

/// Log-sum-exp evaluation of the union bound.
pub fn q_opt_bound(t: u64, n: usize, mu: f64, lambda: f64) -> QOptBound {
    assert!(n >= 2 && mu > 0.0 && lambda > 0.0);
    let logs: Vec<f64> = (0..=t).map(|ell| ln_summand(t, ell, n, mu, lambda)).collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ln_raw = if peak == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        mu.ln() + peak + logs.iter().map(|l| (l - peak).exp()).sum::<f64>().ln()
    };
    let raw = ln_raw.exp();
    QOptBound {
        ln_raw,
        raw,
        clamped: raw.clamp(0.0, 1.0),
    }
}

/// Exact rational value of the raw union bound; only defined when `4 | n`
/// so that every `p(ℓ, n)` is rational.
pub fn q_opt_bound_exact(t: u64, n: usize, mu: u64, lambda: u64) -> Option<BigRational> {
    if !n.is_multiple_of(4) || n < 4 || mu == 0 {
        return None;
    }
    let quarter = (n / 4) as u32;
    let ratio = BigRational::new(BigInt::from(lambda), BigInt::from(mu));
    let mut sum = BigRational::zero();
    for ell in 1..=t {
        let p = if ell as usize >= n - 1 {
            BigRational::one()
        } else {
            BigRational::new(BigInt::from(ell), BigInt::from(n as u64 - 1)).pow(quarter as i32)
        };
        let c = BigRational::from_integer(BigInt::from(binomial(t, ell)));
        sum += c * ratio.pow(ell as i32) * p;
    }
    Some(sum * BigRational::from_integer(BigInt::from(mu)))
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Depth census of a realized family forest at one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthCensus {
    pub iteration: u64,
    /// `counts[d]` = members whose lineage has `d` mutations.
    pub counts: Vec<usize>,
    pub max_depth: u32,
    pub mean_depth: f64,
}

/// Depth censuses of one instrumented run, one per iteration boundary
/// (index 0 is the initial population).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyTreeStats {
    pub mu: usize,
    pub lambda: usize,
    pub per_iteration: Vec<DepthCensus>,
}

/// Runs exactly `config.max_iterations` iterations (the run is not stopped
/// at an optimum) and records how many mutations separate each member from
/// its initial ancestor.
pub fn simulate_family_tree(config: &EaConfig, f: &FitnessFn) -> Result<FamilyTreeStats> {
    let mut engine = Engine::new(config, f, rng_from_seed(config.seed))?;
    let census = |engine: &Engine<'_, _>| {
        let members = engine.population().members();
        let max_depth = members.iter().map(|m| m.depth).max().unwrap_or(0);
        let mut counts = vec![0usize; max_depth as usize + 1];
        for m in members {
            counts[m.depth as usize] += 1;
        }
        DepthCensus {
            iteration: engine.iteration(),
            counts,
            max_depth,
            mean_depth: members.iter().map(|m| m.depth as f64).sum::<f64>() / members.len() as f64,
        }
    };
    let mut per_iteration = vec![census(&engine)];
    for _ in 0..config.max_iterations {
        engine.step();
        per_iteration.push(census(&engine));
    }
    Ok(FamilyTreeStats {
        mu: config.mu,
        lambda: config.lambda,
        per_iteration,
    })
}
