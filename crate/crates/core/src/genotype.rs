//! Bit-string genotypes, standard-bit mutation and the benchmark functions.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const WORD: usize = 64;

/// A fixed-length string over {0,1}.
///
/// Bits are packed into `u64` words; bits past `len` in the last word are
/// always zero so that word-level popcounts and comparisons stay exact.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    /// All-zero string of length `n`. Panics if `n == 0`.
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "bit strings have positive length");
        BitString {
            words: vec![0; n.div_ceil(WORD)],
            len: n,
        }
    }

    pub fn ones(n: usize) -> Self {
        let mut x = Self::zeros(n);
        x.words.iter_mut().for_each(|w| *w = u64::MAX);
        x.clear_tail();
        x
    }

    /// Uniformly random string of length `n`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut x = Self::zeros(n);
        x.words.iter_mut().for_each(|w| *w = rng.random());
        x.clear_tail();
        x
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut x = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            x.set(i, b);
        }
        x
    }

    /// String whose first `ones` positions are 1 and the rest 0.
    pub fn prefix_ones(n: usize, ones: usize) -> Self {
        assert!(ones <= n);
        let mut x = Self::zeros(n);
        for i in 0..ones {
            x.set(i, true);
        }
        x
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; present for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.count_ones()
    }

    pub fn hamming(&self, other: &BitString) -> usize {
        assert_eq!(self.len, other.len, "hamming distance needs equal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn complement(&self) -> BitString {
        let mut x = BitString {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        x.clear_tail();
        x
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << rem) - 1;
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if bits.is_empty() {
            return Err(Error::Parse("empty bit string".into()));
        }
        Ok(Self::from_bits(&bits))
    }
}

/// Mutation rate `p = c/n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationRate {
    pub c: f64,
}

impl Default for MutationRate {
    fn default() -> Self {
        MutationRate { c: 1.0 }
    }
}

impl MutationRate {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid(format!("mutation scale c must be positive, got {c}")));
        }
        Ok(MutationRate { c })
    }

    /// Per-bit flip probability for dimension `n`, capped at 1.
    pub fn probability(&self, n: usize) -> f64 {
        (self.c / n as f64).min(1.0)
    }
}

/// Standard-bit mutation: returns a copy of `x` with every bit flipped
/// independently with probability `p`.
///
/// Flip positions are drawn by geometric skipping, so the cost is
/// proportional to the number of flips rather than to `n`.
pub fn mutate<R: Rng + ?Sized>(x: &BitString, p: f64, rng: &mut R) -> BitString {
    assert!((0.0..=1.0).contains(&p), "mutation probability {p} outside [0,1]");
    if p == 0.0 {
        return x.clone();
    }
    if p == 1.0 {
        return x.complement();
    }
    let mut y = x.clone();
    let log_keep = (-p).ln_1p();
    let n = x.len();
    let mut pos = 0usize;
    loop {
        // u in (0, 1]
        let u = 1.0 - rng.random::<f64>();
        let gap = (u.ln() / log_keep).floor();
        if gap >= (n - pos) as f64 {
            break;
        }
        pos += gap as usize;
        y.flip(pos);
        pos += 1;
        if pos >= n {
            break;
        }
    }
    y
}

/// Which benchmark a [`FitnessFn`] computes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitnessKind {
    /// Number of one-bits; unique optimum all-ones.
    OneMax,
    /// Number of one-bits; every string with at most `k` zeros is optimal.
    MultiOptOneMax { k: usize },
    /// `n` minus the Hamming distance to `target`; unique optimum `target`.
    UniqueOptGeneric { target: BitString },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitnessFn {
    n: usize,
    kind: FitnessKind,
}

impl FitnessFn {
    pub fn onemax(n: usize) -> Self {
        assert!(n > 0);
        FitnessFn {
            n,
            kind: FitnessKind::OneMax,
        }
    }

    pub fn multi_opt_onemax(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k >= n {
            return Err(invalid(format!("MultiOptOneMax needs k < n, got n={n}, k={k}")));
        }
        Ok(FitnessFn {
            n,
            kind: FitnessKind::MultiOptOneMax { k },
        })
    }

    pub fn unique_opt(target: BitString) -> Self {
        FitnessFn {
            n: target.len(),
            kind: FitnessKind::UniqueOptGeneric { target },
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &FitnessKind {
        &self.kind
    }

    /// Fitness of `x`; fails if `x` has the wrong length.
    pub fn evaluate(&self, x: &BitString) -> Result<i64> {
        self.check_dim(x)?;
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &BitString) -> i64 {
        match &self.kind {
            FitnessKind::OneMax | FitnessKind::MultiOptOneMax { .. } => x.count_ones() as i64,
            FitnessKind::UniqueOptGeneric { target } => (self.n - x.hamming(target)) as i64,
        }
    }

    /// True iff `x` is one of the declared optima.
    pub fn is_optimal(&self, x: &BitString) -> bool {
        debug_assert_eq!(x.len(), self.n);
        match &self.kind {
            FitnessKind::OneMax => x.count_zeros() == 0,
            FitnessKind::MultiOptOneMax { k } => x.count_zeros() <= *k,
            FitnessKind::UniqueOptGeneric { target } => x == target,
        }
    }

    /// Fitness value at and above which a string is optimal. All benchmarks
    /// here have optima exactly at their top fitness values.
    pub fn optimal_fitness(&self) -> i64 {
        match &self.kind {
            FitnessKind::MultiOptOneMax { k } => (self.n - k) as i64,
            _ => self.n as i64,
        }
    }

    /// Number of declared optima, `Σ_{j≤k} C(n, j)` for MultiOptOneMax.
    pub fn optimum_count(&self) -> num_bigint::BigUint {
        use num_bigint::BigUint;
        match &self.kind {
            FitnessKind::MultiOptOneMax { k } => {
                let mut total = BigUint::from(0u32);
                let mut binom = BigUint::from(1u32);
                for j in 0..=*k {
                    total += &binom;
                    binom = binom * BigUint::from(self.n - j) / BigUint::from(j + 1);
                }
                total
            }
            _ => BigUint::from(1u32),
        }
    }

    /// A string whose fitness is exactly `level` (`0 ≤ level ≤ n`).
    ///
    /// For consecutive levels the representatives differ in one bit.
    pub fn level_representative(&self, level: usize) -> BitString {
        assert!(level <= self.n);
        match &self.kind {
            FitnessKind::OneMax | FitnessKind::MultiOptOneMax { .. } => BitString::prefix_ones(self.n, level),
            FitnessKind::UniqueOptGeneric { target } => {
                let mut x = target.clone();
                for i in level..self.n {
                    x.flip(i);
                }
                x
            }
        }
    }

    fn check_dim(&self, x: &BitString) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }
}
