use alloc::vec;
use alloc::vec::Vec;


use crate::{BinSpec, Error, Result};

/// Tolerance on the total mass of a consistent histogram.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum HistogramKind {
    /// Unbiased estimate, possibly negative or not summing to one.
    Raw,
    /// A probability vector.
    Consistent,
}

/// Frequency vector over the bins of a [`BinSpec`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Histogram {
    bins: BinSpec,
    f: Vec<f64>,
    kind: HistogramKind,
}

impl Histogram {
    pub fn raw(f: Vec<f64>) -> Result<Self> {
        let bins = BinSpec::new(f.len())?;
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { bins, f, kind: HistogramKind::Raw })
    }

    pub fn consistent(f: Vec<f64>) -> Result<Self> {
        let bins = BinSpec::new(f.len())?;
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if f.iter().any(|&v| v < 0.0) {
            return Err(Error::NotConsistent("negative frequency"));
        }
        if (f.iter().sum::<f64>() - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::NotConsistent("mass differs from 1"));
        }
        Ok(Self { bins, f, kind: HistogramKind::Consistent })
    }

    /// Normalizes nonnegative weights into a consistent histogram.
    pub fn from_weights(w: Vec<f64>) -> Result<Self> {
        let total: f64 = w.iter().sum();
        if !(total.is_finite() && total > 0.0) || w.iter().any(|&v| v < 0.0) {
            return Err(Error::NotConsistent("weights must be nonnegative with positive sum"));
        }
        Self::consistent(w.into_iter().map(|v| v / total).collect())
    }

    pub fn uniform(bins: BinSpec) -> Self {
        let m = bins.len();
        Self { bins, f: vec![1.0 / m as f64; m], kind: HistogramKind::Consistent }
    }

    /// Point mass on 1-indexed bin `i`.
    pub fn point_mass(bins: BinSpec, i: usize) -> Result<Self> {
        bins.check_index(i)?;
        let mut f = vec![0.0; bins.len()];
        f[i - 1] = 1.0;
        Ok(Self { bins, f, kind: HistogramKind::Consistent })
    }

    pub fn bins(&self) -> BinSpec {
        self.bins
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn freqs(&self) -> &[f64] {
        &self.f
    }

    pub fn into_freqs(self) -> Vec<f64> {
        self.f
    }

    pub fn kind(&self) -> HistogramKind {
        self.kind
    }

    /// Frequency of 1-indexed bin `i`.
    pub fn get(&self, i: usize) -> f64 {
        self.f[i - 1]
    }

    pub fn total(&self) -> f64 {
        self.f.iter().sum()
    }

    pub fn cdf(&self) -> Vec<f64> {
        cdf(&self.f)
    }

    pub(crate) fn same_grid(&self, other: &Histogram) -> Result<()> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch(self.len(), other.len()))
        }
    }

    /// 1-indexed bin with the largest frequency (lowest index on ties).
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.f.iter().enumerate() {
            if v > self.f[best] {
                best = i;
            }
        }
        best + 1
    }
}

/// Running sums `P(X, v) = Σ_{i≤v} f_i`.
pub fn cdf(f: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    f.iter()
        .map(|&v| {
            acc += v;
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cdf_examples() {
        assert_eq!(cdf(&[0.25; 4]), [0.25, 0.5, 0.75, 1.0]);
        assert_eq!(cdf(&[0.0, 0.0, 0.0, 1.0]), [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(cdf(&[0.4, 0.6, 0.0]), [0.4, 1.0, 1.0]);
    }

    #[test]
    fn consistency_checked() {
        assert!(Histogram::consistent(vec![0.5, 0.6]).is_err());
        assert!(Histogram::consistent(vec![1.5, -0.5]).is_err());
        assert!(Histogram::consistent(vec![1.0]).is_err());
        assert!(Histogram::raw(vec![1.5, -0.5]).is_ok());
        assert!(Histogram::raw(vec![f64::NAN, 0.0]).is_err());
        let h = Histogram::from_weights(vec![1.0, 3.0]).unwrap();
        assert_eq!(h.freqs(), [0.25, 0.75]);
    }

    #[test]
    fn point_mass_and_mode() {
        let b = BinSpec::new(5).unwrap();
        let h = Histogram::point_mass(b, 5).unwrap();
        assert_eq!(h.mode(), 5);
        assert_eq!(h.get(5), 1.0);
        assert!(Histogram::point_mass(b, 6).is_err());
    }

    proptest! {
        #[test]
        fn cdf_of_consistent_is_monotone(w in proptest::collection::vec(0.0f64..10.0, 2..40)) {
            prop_assume!(w.iter().sum::<f64>() > 1e-6);
            let h = Histogram::from_weights(w).unwrap();
            let c = h.cdf();
            for k in 1..c.len() {
                prop_assert!(c[k] >= c[k - 1]);
            }
            prop_assert!((c[c.len() - 1] - 1.0).abs() < 1e-9);
        }
    }
}
