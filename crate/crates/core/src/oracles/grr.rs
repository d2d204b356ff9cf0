use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::{BinSpec, Error, Histogram, PrivacyBudget, Result};

/// Generalized randomized response over `m` categories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrrParams {
    bins: BinSpec,
    epsilon: PrivacyBudget,
    p: f64,
    q: f64,
}

impl GrrParams {
    pub fn new(epsilon: PrivacyBudget, bins: BinSpec) -> Self {
        let e = epsilon.exp();
        let d = e + bins.len() as f64 - 1.0;
        Self { bins, epsilon, p: e / d, q: 1.0 / d }
    }

    pub fn bins(&self) -> BinSpec {
        self.bins
    }

    pub fn epsilon(&self) -> PrivacyBudget {
        self.epsilon
    }

    /// Probability of reporting the true category.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Probability of reporting one specific other category.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn output_probability(&self, x: usize, y: usize) -> f64 {
        if x == y {
            self.p
        } else {
            self.q
        }
    }

    /// Largest `Pr[y | x] / Pr[y | x']` over all inputs and outputs.
    pub fn max_output_ratio(&self) -> f64 {
        let m = self.bins.len();
        let mut worst: f64 = 0.0;
        for x in 1..=m {
            for x2 in 1..=m {
                for y in 1..=m {
                    worst = worst.max(self.output_probability(x, y) / self.output_probability(x2, y));
                }
            }
        }
        worst
    }

    pub fn perturb<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> u32 {
        if rng.random_bool(self.p) {
            x as u32
        } else {
            let y = rng.random_range(1..self.bins.len());
            (if y >= x { y + 1 } else { y }) as u32
        }
    }

    pub fn counts(&self, values: &[u32]) -> Result<Vec<u64>> {
        let m = self.bins.len();
        let mut counts = vec![0u64; m];
        for &v in values {
            let v = v as usize;
            if v == 0 || v > m {
                return Err(Error::InvalidReport("GRR index outside 1..=m"));
            }
            counts[v - 1] += 1;
        }
        Ok(counts)
    }

    /// `Φ(B_i) = (count_i - n q) / (n (p - q))`.
    pub fn aggregate(&self, values: &[u32]) -> Result<Histogram> {
        if values.is_empty() {
            return Err(Error::Empty("reports"));
        }
        let n = values.len() as f64;
        let f = self
            .counts(values)?
            .into_iter()
            .map(|c| (c as f64 - n * self.q) / (n * (self.p - self.q)))
            .collect();
        Histogram::raw(f)
    }
}
