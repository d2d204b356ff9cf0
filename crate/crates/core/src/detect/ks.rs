use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KsResult {
    /// `sup_x |F_a(x) - F_b(x)|`.
    pub statistic: f64,
    /// `min(1, 2 exp(-2 S² mn/(m+n)))`.
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("KS sample"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::NonFinite);
    }
    let sorted = |s: &[f64]| {
        let mut v: Vec<f64> = s.to_vec();
        v.sort_by(|x, y| x.partial_cmp(y).expect("no NaN"));
        v
    };
    let (a, b) = (sorted(a), sorted(b));
    let (m, n) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut stat: f64 = 0.0;
    while i < m && j < n {
        let x = a[i].min(b[j]);
        while i < m && a[i] <= x {
            i += 1;
        }
        while j < n && b[j] <= x {
            j += 1;
        }
        stat = stat.max((i as f64 / m as f64 - j as f64 / n as f64).abs());
    }
    let (mf, nf) = (m.min(n) as f64, m.max(n) as f64);
    let p = (2.0 * (-2.0 * stat * stat * mf * nf / (mf + nf)).exp()).min(1.0);
    Ok(KsResult { statistic: stat, p_value: p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!((r.p_value - 2.0 * (-3.0f64).exp()).abs() < 1e-12);
        assert!((r.p_value - 0.0996).abs() < 1e-4);
        let a: Vec<f64> = (0..10).map(|v| v as f64).collect();
        let b: Vec<f64> = (5..15).map(|v| v as f64).collect();
        let r = ks_two_sample(&a, &b).unwrap();
        assert_eq!(r.statistic, 0.5);
        assert!((r.p_value - 2.0 * (-2.5f64).exp()).abs() < 1e-12);
        assert!((r.p_value - 0.1642).abs() < 1e-4);
        assert!(ks_two_sample(&[], &[1.0]).is_err());
    }

    #[test]
    fn ties_across_samples() {
        let r = ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap();
        assert!((r.statistic - 1.0 / 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            a in proptest::collection::vec(0u8..20, 1..30),
            b in proptest::collection::vec(0u8..20, 1..30),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let x = ks_two_sample(&a, &b).unwrap();
            let y = ks_two_sample(&b, &a).unwrap();
            prop_assert_eq!(x, y);
            prop_assert!((0.0..=1.0).contains(&x.statistic));
            prop_assert!((0.0..=1.0).contains(&x.p_value));
        }
    }
}
