use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::bits::{add_set_bits, BitRows};
use super::hash::{vector_sign, vector_word};
use crate::{BinSpec, Error, Histogram, PrivacyBudget, Result};

/// Hadamard-style single-bit reporting with random public ±1 vectors.
///
/// A user with input `x` reports `+c·s[x]` with probability `e^ε/(e^ε+1)`
/// and `-c·s[x]` otherwise. Reports are stored as their sign only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HstParams {
    bins: BinSpec,
    epsilon: PrivacyBudget,
    c: f64,
    p_keep: f64,
}

/// Per-bin counts of users by report sign and vector coordinate.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HstTally {
    /// Positive reports whose vector has +1 at bin i.
    pub pos_plus: Vec<u64>,
    /// Negative reports whose vector has +1 at bin i.
    pub neg_plus: Vec<u64>,
    pub positives: u64,
    pub negatives: u64,
}

impl HstTally {
    /// Reports with `ŝ·s[i] > 0` per bin.
    pub fn positive_support(&self) -> Vec<u64> {
        self.pos_plus.iter().zip(&self.neg_plus).map(|(&a, &b)| a + (self.negatives - b)).collect()
    }
}

impl HstParams {
    pub fn new(epsilon: PrivacyBudget, bins: BinSpec) -> Self {
        let e = epsilon.exp();
        Self { bins, epsilon, c: (e + 1.0) / (e - 1.0), p_keep: e / (e + 1.0) }
    }

    pub fn bins(&self) -> BinSpec {
        self.bins
    }

    pub fn epsilon(&self) -> PrivacyBudget {
        self.epsilon
    }

    /// Report magnitude `(e^ε+1)/(e^ε-1)`.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn p_keep(&self) -> f64 {
        self.p_keep
    }

    /// `Pr[report sign | s[x]]` for a fixed public vector.
    pub fn output_probability(&self, coordinate_positive: bool, report_positive: bool) -> f64 {
        if coordinate_positive == report_positive {
            self.p_keep
        } else {
            1.0 - self.p_keep
        }
    }

    /// Largest likelihood ratio of a report between two inputs, over the
    /// given public vectors.
    pub fn max_output_ratio(&self, seeds: &[u64]) -> f64 {
        let m = self.bins.len();
        let mut worst: f64 = 0.0;
        for &s in seeds {
            for sign in [false, true] {
                for x in 1..=m {
                    for x2 in 1..=m {
                        let a = self.output_probability(vector_sign(s, x), sign);
                        let b = self.output_probability(vector_sign(s, x2), sign);
                        worst = worst.max(a / b);
                    }
                }
            }
        }
        worst
    }

    /// Sign of the report given the vector coordinate at the input.
    pub fn perturb<R: Rng + ?Sized>(&self, coordinate_positive: bool, rng: &mut R) -> bool {
        if rng.random_bool(self.p_keep) {
            coordinate_positive
        } else {
            !coordinate_positive
        }
    }

    #[cfg(test)]
    pub(crate) fn signed_value(&self, positive: bool) -> f64 {
        if positive {
            self.c
        } else {
            -self.c
        }
    }

    pub(crate) fn tally_explicit(&self, vectors: &BitRows, positive: &[bool]) -> Result<HstTally> {
        if vectors.width() != self.bins.len() {
            return Err(Error::InvalidReport("HST vector length differs from bin count"));
        }
        if vectors.len() != positive.len() {
            return Err(Error::InvalidReport("HST vectors and values differ in count"));
        }
        let m = self.bins.len();
        let mut t = HstTally { pos_plus: vec![0; m], neg_plus: vec![0; m], positives: 0, negatives: 0 };
        for (j, &sgn) in positive.iter().enumerate() {
            if sgn {
                t.positives += 1;
                add_set_bits(vectors.row(j), &mut t.pos_plus, 1);
            } else {
                t.negatives += 1;
                add_set_bits(vectors.row(j), &mut t.neg_plus, 1);
            }
        }
        Ok(t)
    }

    pub(crate) fn tally_seeded(&self, seeds: &[u64], positive: &[bool]) -> Result<HstTally> {
        if seeds.len() != positive.len() {
            return Err(Error::AssignmentLength { got: seeds.len(), need: positive.len() });
        }
        let m = self.bins.len();
        let stride = m.div_ceil(64);
        let tail = m % 64;
        let mut row = vec![0u64; stride];
        let mut t = HstTally { pos_plus: vec![0; m], neg_plus: vec![0; m], positives: 0, negatives: 0 };
        for (&s, &sgn) in seeds.iter().zip(positive) {
            for (k, w) in row.iter_mut().enumerate() {
                *w = vector_word(s, k);
            }
            if tail != 0 {
                row[stride - 1] &= (1u64 << tail) - 1;
            }
            if sgn {
                t.positives += 1;
                add_set_bits(&row, &mut t.pos_plus, 1);
            } else {
                t.negatives += 1;
                add_set_bits(&row, &mut t.neg_plus, 1);
            }
        }
        Ok(t)
    }

    /// `Φ(B_i) = (1/n) Σ_j ŝ_j s_j[i]`.
    pub(crate) fn estimate(&self, t: &HstTally) -> Result<Histogram> {
        let n = t.positives + t.negatives;
        if n == 0 {
            return Err(Error::Empty("reports"));
        }
        let signed_total = t.positives as f64 - t.negatives as f64;
        let f = t
            .pos_plus
            .iter()
            .zip(&t.neg_plus)
            .map(|(&a, &b)| {
                let plus = a as f64 - b as f64;
                self.c * (2.0 * plus - signed_total) / n as f64
            })
            .collect();
        Histogram::raw(f)
    }

    pub fn aggregate_explicit(&self, vectors: &BitRows, positive: &[bool]) -> Result<Histogram> {
        self.estimate(&self.tally_explicit(vectors, positive)?)
    }

    pub fn aggregate_seeded(&self, seeds: &[u64], positive: &[bool]) -> Result<Histogram> {
        self.estimate(&self.tally_seeded(seeds, positive)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::hash::hst_vector;
    use crate::RngStream;
    use rand::{Rng, RngCore};

    fn params(eps: f64, m: usize) -> HstParams {
        HstParams::new(PrivacyBudget::new(eps).unwrap(), BinSpec::new(m).unwrap())
    }

    #[test]
    fn constants() {
        let h = params(3f64.ln(), 8);
        assert!((h.c() - 2.0).abs() < 1e-12);
        for eps in [0.1, 1.0, 4.0] {
            let h = params(eps, 8);
            assert!(h.c() > 1.0);
            assert!((h.p_keep() * h.c() - (1.0 - h.p_keep()) * h.c() - 1.0).abs() < 1e-9);
            assert!((h.max_output_ratio(&[1, 2, 3]) - eps.exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn expected_contribution_is_one() {
        // Exact expectation over the report sign for a user at bin x.
        let h = params(0.7, 16);
        let s = 1234;
        let x = 5;
        let sx = if vector_sign(s, x) { 1.0 } else { -1.0 };
        let expect = h.p_keep() * h.c() * sx * sx - (1.0 - h.p_keep()) * h.c() * sx * sx;
        assert!((expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn explicit_and_seeded_agree() {
        let h = params(1.0, 70);
        let mut rng = RngStream::new(1);
        let seeds: Vec<u64> = (0..500).map(|_| rng.next_u64()).collect();
        let signs: Vec<bool> = (0..500).map(|_| rng.random_bool(0.5)).collect();
        let mut rows = BitRows::new(70);
        for &s in &seeds {
            let v: Vec<bool> = hst_vector(s, 70).into_iter().map(|c| c > 0).collect();
            rows.push_bools(&v);
        }
        let a = h.aggregate_explicit(&rows, &signs).unwrap();
        let b = h.aggregate_seeded(&seeds, &signs).unwrap();
        assert_eq!(a, b);
        // Direct definition.
        for i in 1..=70 {
            let direct: f64 = seeds
                .iter()
                .zip(&signs)
                .map(|(&s, &p)| h.signed_value(p) * if vector_sign(s, i) { 1.0 } else { -1.0 })
                .sum::<f64>()
                / 500.0;
            assert!((a.get(i) - direct).abs() < 1e-9);
        }
    }
}
