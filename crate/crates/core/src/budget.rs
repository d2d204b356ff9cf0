#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Privacy budget ε of an LDP randomizer.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "f64", into = "f64"))]
pub struct PrivacyBudget(f64);

impl PrivacyBudget {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon.is_finite() && epsilon > 0.0 {
            Ok(Self(epsilon))
        } else {
            Err(Error::InvalidEpsilon(epsilon))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `e^ε`.
    pub fn exp(self) -> f64 {
        self.0.exp()
    }
}

impl TryFrom<f64> for PrivacyBudget {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<PrivacyBudget> for f64 {
    fn from(value: PrivacyBudget) -> f64 {
        value.0
    }
}
