use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::{BinSpec, Error, Histogram, Result};

/// Values of one numerical attribute, all in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        if let Some(&bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::OutOfUnitInterval(bad));
        }
        Ok(Self { values })
    }

    /// Maps arbitrary reals into [0, 1] with `x -> (x - min) / (max - min)`.
    pub fn normalize(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            return Err(Error::ConstantInput);
        }
        let span = hi - lo;
        let values = raw.iter().map(|&x| ((x - lo) / span).clamp(0.0, 1.0)).collect();
        Ok(Self { values })
    }

    /// `n` draws from N(mu, sigma²), min/max normalized into [0, 1].
    pub fn gaussian<R: Rng + ?Sized>(n: usize, mu: f64, sigma: f64, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("dataset"));
        }
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::Domain("sigma must be positive and mu finite"));
        }
        let normal = Normal::new(mu, sigma).map_err(|_| Error::Domain("invalid normal parameters"))?;
        let raw: Vec<f64> = (0..n).map(|_| normal.sample(rng)).collect();
        if n == 1 {
            return Self::new(vec![0.5]);
        }
        Self::normalize(&raw)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// 1-indexed bin of every value.
    pub fn bin_indices(&self, bins: BinSpec) -> Vec<u32> {
        self.values.iter().map(|&x| bins.bin_of_unchecked(x) as u32).collect()
    }

    /// Empirical frequencies; always consistent.
    pub fn histogram(&self, bins: BinSpec) -> Histogram {
        let mut counts = vec![0.0; bins.len()];
        for &x in &self.values {
            counts[bins.bin_of_unchecked(x) - 1] += 1.0;
        }
        let n = self.values.len() as f64;
        let f = counts.into_iter().map(|c| c / n).collect();
        Histogram::consistent(f).expect("empirical frequencies form a distribution")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RngStream;

    fn b(m: usize) -> BinSpec {
        BinSpec::new(m).unwrap()
    }

    #[test]
    fn empirical_examples() {
        let h = Dataset::new(vec![0.1, 0.9]).unwrap().histogram(b(2));
        assert_eq!(h.freqs(), [0.5, 0.5]);
        let h = Dataset::new(vec![1.0; 3]).unwrap().histogram(b(4));
        assert_eq!(h.freqs(), [0.0, 0.0, 0.0, 1.0]);
        let h = Dataset::new(vec![0.0, 0.3, 0.6, 0.9]).unwrap().histogram(b(2));
        assert_eq!(h.freqs(), [0.5, 0.5]);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(Dataset::normalize(&[0.0, 50.0, 100.0]).unwrap().values(), [0.0, 0.5, 1.0]);
        assert_eq!(Dataset::normalize(&[-28700.0, 101000.0]).unwrap().values(), [0.0, 1.0]);
        let d = Dataset::normalize(&[10.0, 20.0, 40.0]).unwrap();
        assert_eq!(d.values()[0], 0.0);
        assert!((d.values()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.values()[2], 1.0);
        assert_eq!(Dataset::normalize(&[3.0, 3.0]), Err(Error::ConstantInput));
        assert!(Dataset::normalize(&[]).is_err());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Dataset::new(vec![]).is_err());
        assert!(Dataset::new(vec![0.5, 1.5]).is_err());
    }

    #[test]
    fn gaussian_properties() {
        let d = Dataset::gaussian(100_000, 0.0, 10.0, &mut RngStream::new(1)).unwrap();
        let lo = d.values().iter().copied().fold(1.0, f64::min);
        let hi = d.values().iter().copied().fold(0.0, f64::max);
        assert_eq!((lo, hi), (0.0, 1.0));

        let a = Dataset::gaussian(3, 0.0, 10.0, &mut RngStream::new(1)).unwrap();
        let b = Dataset::gaussian(3, 0.0, 10.0, &mut RngStream::new(1)).unwrap();
        assert_eq!(a, b);

        let d = Dataset::gaussian(100_000, 0.0, 10.0, &mut RngStream::new(7)).unwrap();
        assert!((0.45..=0.55).contains(&d.mean()), "mean {}", d.mean());

        assert!(Dataset::gaussian(0, 0.0, 10.0, &mut RngStream::new(1)).is_err());
        assert!(Dataset::gaussian(10, 0.0, 0.0, &mut RngStream::new(1)).is_err());
    }
}
