use crate::{Error, Result};

/// Partition of [0, 1] into `m` equal-width bins, addressed 1..=m.
///
/// Bin `i` covers `[(i-1)/m, i/m)`; the last bin is closed at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "usize", into = "usize"))]
pub struct BinSpec {
    m: usize,
}

impl BinSpec {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewBins(m));
        }
        Ok(Self { m })
    }

    pub fn len(self) -> usize {
        self.m
    }

    pub fn width(self) -> f64 {
        1.0 / self.m as f64
    }

    /// 1-indexed bin containing `x`.
    pub fn bin_of(self, x: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfUnitInterval(x));
        }
        Ok(self.bin_of_unchecked(x))
    }

    #[inline]
    pub(crate) fn bin_of_unchecked(self, x: f64) -> usize {
        // `as` saturates, and the min() handles both x = 1 and rounding at the top edge.
        ((x * self.m as f64) as usize + 1).min(self.m)
    }

    /// Midpoint of 1-indexed bin `i`.
    pub fn center(self, i: usize) -> f64 {
        (i as f64 - 0.5) / self.m as f64
    }

    pub fn check_index(self, i: usize) -> Result<()> {
        if i == 0 || i > self.m {
            Err(Error::BinIndex { index: i, bins: self.m })
        } else {
            Ok(())
        }
    }
}

impl TryFrom<usize> for BinSpec {
    type Error = Error;

    fn try_from(m: usize) -> Result<Self> {
        Self::new(m)
    }
}

impl From<BinSpec> for usize {
    fn from(b: BinSpec) -> usize {
        b.m
    }
}
