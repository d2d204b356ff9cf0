#[allow(unused_imports)]
use num_traits::Float;

use crate::special::reg_inc_beta;
use crate::{Error, Mechanism, Protocol, Reports, Result};

/// Tail probability bound used for the thresholds.
pub const MUD_SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MudOutcome {
    /// Reports supporting the right-most bin.
    pub count: u64,
    pub threshold: f64,
    /// `count > threshold`.
    pub alarm: bool,
}

/// Smallest `τ` in `1..=n` with `I(x; τ, n-τ+1) ≤ bound`, or `n + 1`.
fn binomial_threshold(x: f64, n: usize, bound: f64) -> Result<f64> {
    let tail = |t: usize| reg_inc_beta(x, t as f64, (n - t + 1) as f64);
    if tail(n)? > bound {
        return Ok((n + 1) as f64);
    }
    // The tail shrinks as τ grows.
    let (mut lo, mut hi) = (1usize, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if tail(mid)? <= bound {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo as f64)
}

/// Alarm threshold on the support count of the right-most bin.
pub fn mud_threshold_with(protocol: Protocol, epsilon: f64, n: usize, bound: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Empty("reports"));
    }
    if !(bound > 0.0 && bound < 1.0) {
        return Err(Error::Domain("significance bound must lie in (0, 1)"));
    }
    let nf = n as f64;
    match protocol {
        Protocol::Oue => Ok(((nf / 4.0) / bound).sqrt() + nf / 2.0),
        Protocol::Olh => binomial_threshold(0.5, n, bound),
        Protocol::Hst => {
            let e = epsilon.exp();
            binomial_threshold(e / (e + 1.0), n, bound)
        }
        Protocol::Grr | Protocol::Sw => Err(Error::Unsupported("MUD is defined for OUE, OLH and HST")),
    }
}

pub fn mud_threshold(protocol: Protocol, epsilon: f64, n: usize) -> Result<f64> {
    mud_threshold_with(protocol, epsilon, n, MUD_SIGNIFICANCE)
}

/// Counts reports supporting bin `m` and compares against the threshold.
pub fn mud_detect(reports: &Reports, mechanism: &Mechanism, assignment: Option<&[u64]>) -> Result<MudOutcome> {
    let protocol = mechanism.protocol();
    let threshold = mud_threshold(protocol, mechanism.epsilon().value(), reports.len().max(1))?;
    let m = mechanism.eval_bins().len();
    let count = match (mechanism, reports) {
        (Mechanism::Oue(_), Reports::Oue(rows)) => (0..rows.len()).filter(|&j| rows.get(j, m)).count() as u64,
        (Mechanism::Olh { params, .. }, Reports::Olh { seeds, values }) => {
            let seeds = seeds.as_deref().or(assignment).ok_or(Error::MissingAssignment)?;
            if seeds.len() != values.len() {
                return Err(Error::AssignmentLength { got: seeds.len(), need: values.len() });
            }
            seeds.iter().zip(values).filter(|(&s, &v)| params.hash(s, m) == v).count() as u64
        }
        (Mechanism::Hst { params, .. }, Reports::Hst { vectors, positive }) => {
            let tally = match vectors {
                Some(rows) => params.tally_explicit(rows, positive)?,
                None => params.tally_seeded(assignment.ok_or(Error::MissingAssignment)?, positive)?,
            };
            tally.positive_support()[m - 1]
        }
        _ => return Err(Error::ProtocolMismatch(protocol.name())),
    };
    Ok(MudOutcome { count, threshold, alarm: count as f64 > threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{MechanismConfig, Setting};
    use alloc::vec;
    use alloc::vec::Vec;

    fn exact_tail(x: f64, n: usize, t: usize) -> f64 {
        let mut binom: Vec<f64> = vec![1.0];
        for k in 1..=n {
            let prev = binom[k - 1];
            binom.push(prev * (n - k + 1) as f64 / k as f64);
        }
        (t..=n).map(|k| binom[k] * x.powi(k as i32) * (1.0 - x).powi((n - k) as i32)).sum()
    }

    #[test]
    fn oue_threshold() {
        assert!((mud_threshold(Protocol::Oue, 0.6, 10_000).unwrap() - 5500.0).abs() < 1e-9);
        assert!(mud_threshold(Protocol::Grr, 0.6, 10_000).is_err());
        assert!(mud_threshold(Protocol::Sw, 0.6, 10_000).is_err());
        assert!(mud_threshold(Protocol::Oue, 0.6, 0).is_err());
    }

    #[test]
    fn binomial_thresholds_against_exact_tails() {
        for n in [10usize, 37, 100, 200] {
            for (p, x) in [(Protocol::Olh, 0.5), (Protocol::Hst, 0.6f64.exp() / (0.6f64.exp() + 1.0))] {
                let t = mud_threshold(p, 0.6, n).unwrap() as usize;
                assert!(exact_tail(x, n, t) <= 0.01 + 1e-12, "n {n}");
                assert!(exact_tail(x, n, t - 1) > 0.01, "n {n}: tau {t} not minimal");
            }
        }
    }

    #[test]
    fn stricter_bound_raises_threshold() {
        let mut prev = 0.0;
        for bound in [0.2, 0.1, 0.05, 0.01, 0.001, 1e-6] {
            for p in [Protocol::Oue, Protocol::Olh, Protocol::Hst] {
                let t = mud_threshold_with(p, 1.0, 500, bound).unwrap();
                assert!(t >= mud_threshold_with(p, 1.0, 500, bound * 2.0).unwrap());
            }
            let t = mud_threshold_with(Protocol::Olh, 1.0, 500, bound).unwrap();
            assert!(t >= prev);
            prev = t;
        }
    }

    #[test]
    fn no_support_no_alarm() {
        let m = Mechanism::new(Protocol::Oue, Setting::User, 0.6, &MechanismConfig::default()).unwrap();
        let rows = crate::oracles::BitRows::with_capacity(32, 0);
        let mut rows = rows;
        for _ in 0..100 {
            rows.push_positions(&[1]);
        }
        let out = mud_detect(&Reports::Oue(rows), &m, None).unwrap();
        assert_eq!(out.count, 0);
        assert!(!out.alarm);
    }
}
