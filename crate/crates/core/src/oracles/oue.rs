use alloc::vec::Vec;

use rand::RngCore;

use super::bits::BitRows;
use crate::{BinSpec, Error, Histogram, PrivacyBudget, Result};

/// Optimized unary encoding: the hot bit is kept with probability 1/2, every
/// cold bit is set with probability `1 / (e^ε + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OueParams {
    bins: BinSpec,
    epsilon: PrivacyBudget,
    q: f64,
}

impl OueParams {
    pub const P: f64 = 0.5;

    pub fn new(epsilon: PrivacyBudget, bins: BinSpec) -> Self {
        Self { bins, epsilon, q: 1.0 / (epsilon.exp() + 1.0) }
    }

    pub fn bins(&self) -> BinSpec {
        self.bins
    }

    pub fn epsilon(&self) -> PrivacyBudget {
        self.epsilon
    }

    pub fn p(&self) -> f64 {
        Self::P
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Expected number of set bits in an honest report.
    pub fn expected_ones(&self) -> f64 {
        Self::P + (self.bins.len() as f64 - 1.0) * self.q
    }

    /// Largest likelihood ratio of a report between two inputs. Only the two
    /// positions where the encodings differ contribute, so the four settings
    /// of those bits cover every output vector.
    pub fn max_output_ratio(&self) -> f64 {
        let bit = |hot: bool, set: bool| match (hot, set) {
            (true, true) => Self::P,
            (true, false) => 1.0 - Self::P,
            (false, true) => self.q,
            (false, false) => 1.0 - self.q,
        };
        let mut worst: f64 = 0.0;
        for a in [false, true] {
            for b in [false, true] {
                let num = bit(true, a) * bit(false, b);
                let den = bit(false, a) * bit(true, b);
                worst = worst.max(num / den);
            }
        }
        worst
    }

    /// Cold bits compare 32-bit uniforms against `round(q · 2^32)`, two per
    /// 64-bit draw; the hot bit is a fair coin.
    pub(crate) fn perturb_into<R: RngCore + ?Sized>(&self, x: usize, rows: &mut BitRows, rng: &mut R) {
        let threshold = (self.q * 4_294_967_296.0).round() as u64;
        let m = self.bins.len();
        let row = rows.push_zeroed();
        let mut i = 0;
        while i < m {
            let r = rng.next_u64();
            for u in [r & 0xFFFF_FFFF, r >> 32] {
                if i < m {
                    row[i / 64] |= ((u < threshold) as u64) << (i % 64);
                    i += 1;
                }
            }
        }
        let (w, b) = ((x - 1) / 64, (x - 1) % 64);
        row[w] = (row[w] & !(1 << b)) | (((rng.next_u32() & 1) as u64) << b);
    }

    /// Perturbs one input and returns its bits.
    pub fn perturb<R: RngCore + ?Sized>(&self, x: usize, rng: &mut R) -> Vec<bool> {
        let mut rows = BitRows::new(self.bins.len());
        self.perturb_into(x, &mut rows, rng);
        rows.row_bools(0)
    }

    /// `Φ(B_i) = (Σ_j v_j[i] - n/(e^ε+1)) / (n (1/2 - 1/(e^ε+1)))`.
    pub fn aggregate(&self, rows: &BitRows) -> Result<Histogram> {
        if rows.width() != self.bins.len() {
            return Err(Error::InvalidReport("OUE vector length differs from bin count"));
        }
        if rows.is_empty() {
            return Err(Error::Empty("reports"));
        }
        let n = rows.len() as f64;
        let f: Vec<f64> = rows
            .column_counts()
            .into_iter()
            .map(|c| (c as f64 - n * self.q) / (n * (Self::P - self.q)))
            .collect();
        Histogram::raw(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RngStream;

    fn params(eps: f64, m: usize) -> OueParams {
        OueParams::new(PrivacyBudget::new(eps).unwrap(), BinSpec::new(m).unwrap())
    }

    #[test]
    fn constants() {
        let o = params(0.2, 32);
        assert!((o.expected_ones() - (0.5 + 31.0 / (0.2f64.exp() + 1.0))).abs() < 1e-12);
        assert!((o.expected_ones() - 14.45).abs() < 0.01);
        assert!(o.q() < 0.5);
        for eps in [0.1, 0.5, 1.0, 2.0, 4.0] {
            assert!((params(eps, 8).max_output_ratio() - eps.exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn expected_ones_empirically() {
        let o = params(0.2, 32);
        let mut rng = RngStream::new(1);
        let mut rows = BitRows::new(32);
        for j in 0..10_000 {
            o.perturb_into(j % 32 + 1, &mut rows, &mut rng);
        }
        let mean = (0..rows.len()).map(|j| rows.row_ones(j)).sum::<usize>() as f64 / rows.len() as f64;
        assert!((mean - 14.45).abs() < 0.2, "{mean}");
    }

    #[test]
    fn huge_epsilon_is_one_hot_or_empty() {
        let o = params(60.0, 8);
        let mut rng = RngStream::new(2);
        let mut hot = 0;
        for _ in 0..2000 {
            let v = o.perturb(3, &mut rng);
            assert!(v.iter().enumerate().all(|(i, &b)| !b || i == 2));
            hot += v[2] as usize;
        }
        assert!((hot as f64 / 2000.0 - 0.5).abs() < 0.05);
    }

    #[test]
    fn width_mismatch_rejected() {
        let o = params(1.0, 8);
        let mut rows = BitRows::new(9);
        rows.push_positions(&[1]);
        assert!(o.aggregate(&rows).is_err());
        assert!(o.aggregate(&BitRows::new(8)).is_err());
    }
}
