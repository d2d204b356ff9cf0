use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::hash::hash_unchecked;
use crate::{BinSpec, Error, Histogram, PrivacyBudget, Result};

/// Optimized local hashing: hash the bin into `1..=g`, then run randomized
/// response over the hash range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlhParams {
    bins: BinSpec,
    epsilon: PrivacyBudget,
    g: usize,
    p: f64,
    q: f64,
}

impl OlhParams {
    /// Uses the variance-optimal range `g = ⌊e^ε + 1⌋`.
    pub fn new(epsilon: PrivacyBudget, bins: BinSpec) -> Self {
        let g = (epsilon.exp() + 1.0).floor() as usize;
        Self::with_range(epsilon, bins, g.max(2)).expect("default range is at least 2")
    }

    pub fn with_range(epsilon: PrivacyBudget, bins: BinSpec, g: usize) -> Result<Self> {
        if g < 2 {
            return Err(Error::InvalidHashRange(g));
        }
        let e = epsilon.exp();
        let d = e + g as f64 - 1.0;
        Ok(Self { bins, epsilon, g, p: e / d, q: 1.0 / d })
    }

    pub fn bins(&self) -> BinSpec {
        self.bins
    }

    pub fn epsilon(&self) -> PrivacyBudget {
        self.epsilon
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn hash(&self, seed: u64, x: usize) -> u32 {
        hash_unchecked(seed, x, self.g as u64)
    }

    /// `Pr[value | x]` for a fixed hash seed.
    pub fn output_probability(&self, seed: u64, x: usize, value: u32) -> f64 {
        if self.hash(seed, x) == value {
            self.p
        } else {
            self.q
        }
    }

    /// Largest output likelihood ratio over inputs, values and the given seeds.
    pub fn max_output_ratio(&self, seeds: &[u64]) -> f64 {
        let m = self.bins.len();
        let mut worst: f64 = 0.0;
        for &s in seeds {
            for v in 1..=self.g as u32 {
                let probs: Vec<f64> = (1..=m).map(|x| self.output_probability(s, x, v)).collect();
                let hi = probs.iter().copied().fold(0.0, f64::max);
                let lo = probs.iter().copied().fold(f64::INFINITY, f64::min);
                worst = worst.max(hi / lo);
            }
        }
        worst
    }

    pub fn perturb<R: Rng + ?Sized>(&self, x: usize, seed: u64, rng: &mut R) -> u32 {
        let h = self.hash(seed, x);
        if rng.random_bool(self.p) {
            h
        } else {
            let y = rng.random_range(1..self.g as u32);
            if y >= h {
                y + 1
            } else {
                y
            }
        }
    }

    /// `C(B_i) = |{j : H_j(i) = y_j}|` for every bin.
    pub fn support_counts(&self, seeds: &[u64], values: &[u32]) -> Result<Vec<u64>> {
        if seeds.len() != values.len() {
            return Err(Error::AssignmentLength { got: seeds.len(), need: values.len() });
        }
        let m = self.bins.len();
        let g = self.g as u64;
        let mut counts = vec![0u64; m];
        for (&s, &v) in seeds.iter().zip(values) {
            if v == 0 || v as usize > self.g {
                return Err(Error::InvalidReport("OLH value outside 1..=g"));
            }
            for (i, c) in counts.iter_mut().enumerate() {
                *c += (hash_unchecked(s, i + 1, g) == v) as u64;
            }
        }
        Ok(counts)
    }

    /// `Φ(B_i) = (C(B_i) - n/g) / (n (p - 1/g))`.
    pub fn aggregate(&self, seeds: &[u64], values: &[u32]) -> Result<Histogram> {
        if values.is_empty() {
            return Err(Error::Empty("reports"));
        }
        let n = values.len() as f64;
        let inv_g = 1.0 / self.g as f64;
        let f = self
            .support_counts(seeds, values)?
            .into_iter()
            .map(|c| (c as f64 - n * inv_g) / (n * (self.p - inv_g)))
            .collect();
        Histogram::raw(f)
    }
}
