use alloc::vec;
use alloc::vec::Vec;

use crate::metrics::wasserstein1_weights;
use crate::sw::cell_counts;
use crate::{Error, Mechanism, Reports, Result};

/// Normalized per-bin support of a report multiset.
///
/// GRR: reported index frequencies. OUE: per-position one-bit rate. OLH:
/// per-bin support `|{j : H_j(i) = y_j}|`. HST: per-bin count of reports with
/// `ŝ_j · s_j[i] > 0`. SW: report histogram over the output cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSummary {
    pub weights: Vec<f64>,
    /// Grid spacing used by the W1 distance.
    pub spacing: f64,
}

impl ReportSummary {
    pub fn distance(&self, other: &ReportSummary) -> Result<f64> {
        if self.weights.len() != other.weights.len() {
            return Err(Error::GridMismatch(self.weights.len(), other.weights.len()));
        }
        Ok(wasserstein1_weights(&self.weights, &other.weights, self.spacing))
    }
}

fn normalize(counts: Vec<f64>) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    if total > 0.0 {
        counts.into_iter().map(|c| c / total).collect()
    } else {
        let m = counts.len() as f64;
        vec![1.0 / m; counts.len()]
    }
}

pub fn report_summary(reports: &Reports, mechanism: &Mechanism, assignment: Option<&[u64]>) -> Result<ReportSummary> {
    if reports.protocol() != mechanism.protocol() {
        return Err(Error::ProtocolMismatch(mechanism.protocol().name()));
    }
    if reports.is_empty() {
        return Err(Error::Empty("reports"));
    }
    let spacing = mechanism.eval_bins().width();
    let to_f = |v: Vec<u64>| v.into_iter().map(|c| c as f64).collect::<Vec<f64>>();
    let weights = match (mechanism, reports) {
        (Mechanism::Grr(p), Reports::Grr(v)) => to_f(p.counts(v)?),
        (Mechanism::Oue(p), Reports::Oue(rows)) => {
            if rows.width() != p.bins().len() {
                return Err(Error::InvalidReport("OUE vector length differs from bin count"));
            }
            to_f(rows.column_counts())
        }
        (Mechanism::Olh { params, .. }, Reports::Olh { seeds, values }) => {
            let seeds = seeds.as_deref().or(assignment).ok_or(Error::MissingAssignment)?;
            to_f(params.support_counts(seeds, values)?)
        }
        (Mechanism::Hst { params, .. }, Reports::Hst { vectors, positive }) => {
            let tally = match vectors {
                Some(rows) => params.tally_explicit(rows, positive)?,
                None => params.tally_seeded(assignment.ok_or(Error::MissingAssignment)?, positive)?,
            };
            to_f(tally.positive_support())
        }
        (Mechanism::Sw { params, .. }, Reports::Sw(v)) => {
            return Ok(ReportSummary { weights: normalize(cell_counts(v, params)?), spacing: params.cell_width() });
        }
        _ => return Err(Error::ProtocolMismatch(mechanism.protocol().name())),
    };
    Ok(ReportSummary { weights: normalize(weights), spacing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::attack_oue;
    use crate::{MechanismConfig, Protocol, RngStream, Setting};
    use rand::Rng;

    #[test]
    fn oue_summaries() {
        let m = Mechanism::new(Protocol::Oue, Setting::User, 1.0, &MechanismConfig::default()).unwrap();
        let mut rng = RngStream::new(1);
        let values: Vec<f64> = (0..50_000).map(|_| rng.random()).collect();
        let r = m.perturb_values(&values, None, &mut rng).unwrap();
        let s = report_summary(&r, &m, None).unwrap();
        assert!(s.weights.iter().all(|&w| (w - 1.0 / 32.0).abs() < 0.002));
        let Mechanism::Oue(p) = &m else { panic!() };
        let s = report_summary(&attack_oue(p, 10), &m, None).unwrap();
        assert_eq!(s.weights[31], 1.0);
        assert!(s.weights[..31].iter().all(|&w| w == 0.0));
    }

    #[test]
    fn sw_summary_sums_to_one_and_order_invariant() {
        let m = Mechanism::new(Protocol::Sw, Setting::User, 1.0, &MechanismConfig::default()).unwrap();
        let mut rng = RngStream::new(2);
        let values: Vec<f64> = (0..1000).map(|_| rng.random()).collect();
        let r = m.perturb_values(&values, None, &mut rng).unwrap();
        let s = report_summary(&r, &m, None).unwrap();
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let Reports::Sw(mut v) = r else { panic!() };
        v.reverse();
        assert_eq!(report_summary(&Reports::Sw(v), &m, None).unwrap(), s);
    }

    #[test]
    fn server_summary_needs_assignment() {
        let m = Mechanism::new(Protocol::Hst, Setting::Server, 1.0, &MechanismConfig::default()).unwrap();
        let r = Reports::Hst { vectors: None, positive: alloc::vec![true; 3] };
        assert!(report_summary(&r, &m, None).is_err());
        assert!(report_summary(&r, &m, Some(&[1, 2, 3])).is_ok());
    }
}
