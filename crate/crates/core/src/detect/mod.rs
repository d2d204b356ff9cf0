//! Poisoning detection: the zero-shot detector, the KS test it relies on,
//! and the MUD threshold baseline.

mod ks;
mod mud;
mod summary;

pub use ks::{ks_two_sample, KsResult};
pub use mud::{mud_detect, mud_threshold, mud_threshold_with, MudOutcome, MUD_SIGNIFICANCE};
pub use summary::{report_summary, ReportSummary};

use alloc::vec::Vec;

use rand::RngCore;

use crate::mechanism::sample_bins;
use crate::{Mechanism, Reports, Result, RngStream, ServerAssignment};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroShotConfig {
    /// Reconstruction rounds.
    pub rounds: usize,
    /// Significance level of the KS test.
    pub alpha: f64,
}

impl Default for ZeroShotConfig {
    fn default() -> Self {
        Self { rounds: 10, alpha: 0.002 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectionVerdict {
    /// Benchmark distances between consecutive reconstructions.
    pub g_ben: Vec<f64>,
    /// Distances between the observed reports and the first reconstructions.
    pub g_det: Vec<f64>,
    pub ks_stat: f64,
    pub p_value: f64,
    pub polluted: bool,
}

/// Samples drawn from an estimated distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Synthetic {
    /// 1-indexed CFO bins.
    Bins(Vec<u32>),
    /// SW bin centers on the `m_s` grid.
    Values(Vec<f64>),
}

impl Synthetic {
    pub fn len(&self) -> usize {
        match self {
            Synthetic::Bins(v) => v.len(),
            Synthetic::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Estimates the distribution behind `reports` and draws `t` samples from it.
pub fn synthesize<R: RngCore + ?Sized>(
    reports: &Reports,
    mechanism: &Mechanism,
    assignment: Option<&[u64]>,
    t: usize,
    rng: &mut R,
) -> Result<Synthetic> {
    let h = mechanism.estimate(reports, assignment)?;
    let bins = sample_bins(&h, t, rng);
    Ok(match mechanism {
        Mechanism::Sw { .. } => {
            let grid = h.bins();
            Synthetic::Values(bins.into_iter().map(|i| grid.center(i as usize)).collect())
        }
        _ => Synthetic::Bins(bins),
    })
}

/// Runs the randomizer on synthetic data, drawing a fresh assignment when
/// the server controls seeds.
fn reperturb(
    data: &Synthetic,
    mechanism: &Mechanism,
    rng: &mut RngStream,
) -> Result<(Reports, Option<ServerAssignment>)> {
    let assignment = mechanism.draw_assignment(data.len(), rng);
    let seeds = assignment.as_ref().map(|a| a.seeds());
    let reports = match data {
        Synthetic::Bins(b) => mechanism.perturb_bins(b, seeds, rng)?,
        Synthetic::Values(v) => mechanism.perturb_values(v, seeds, rng)?,
    };
    Ok((reports, assignment))
}

/// Zero-shot poisoning detection.
///
/// Synthesizes data from the observed reports once, then in each round
/// perturbs it (`X̂₂`), synthesizes again from `X̂₂` and perturbs that
/// (`X̂₃`). The distances `W1(X̂, X̂₂)` are KS-tested against `W1(X̂₂, X̂₃)`.
pub fn zero_shot_detect(
    reports: &Reports,
    mechanism: &Mechanism,
    assignment: Option<&[u64]>,
    config: &ZeroShotConfig,
    rng: &mut RngStream,
) -> Result<DetectionVerdict> {
    let n = reports.len();
    let observed = report_summary(reports, mechanism, assignment)?;
    let base = synthesize(reports, mechanism, assignment, n, &mut rng.substream(0))?;
    let mut g_ben = Vec::with_capacity(config.rounds);
    let mut g_det = Vec::with_capacity(config.rounds);
    for i in 0..config.rounds as u64 {
        let mut round = rng.substream(i + 1);
        let (r2, a2) = reperturb(&base, mechanism, &mut round)?;
        let a2 = a2.as_ref().map(|a| a.seeds());
        let s2 = report_summary(&r2, mechanism, a2)?;
        let x2 = synthesize(&r2, mechanism, a2, n, &mut round)?;
        let (r3, a3) = reperturb(&x2, mechanism, &mut round)?;
        let s3 = report_summary(&r3, mechanism, a3.as_ref().map(|a| a.seeds()))?;
        g_ben.push(s2.distance(&s3)?);
        g_det.push(observed.distance(&s2)?);
    }
    let ks = ks_two_sample(&g_det, &g_ben)?;
    Ok(DetectionVerdict {
        g_ben,
        g_det,
        ks_stat: ks.statistic,
        p_value: ks.p_value,
        polluted: ks.p_value < config.alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{BinSpec, Histogram, MechanismConfig, Protocol, Setting};
    use alloc::vec;

    #[test]
    fn synthesize_basics() {
        let m = Mechanism::new(Protocol::Grr, Setting::User, 60.0, &MechanismConfig::default()).unwrap();
        let reports = Reports::Grr(vec![32; 100]);
        let mut rng = RngStream::new(1);
        assert!(synthesize(&reports, &m, None, 0, &mut rng).unwrap().is_empty());
        let Synthetic::Bins(b) = synthesize(&reports, &m, None, 500, &mut rng).unwrap() else { panic!() };
        assert!(b.iter().all(|&x| x == 32));
    }

    #[test]
    fn synthetic_samples_follow_estimate() {
        let h = Histogram::consistent(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let bins = sample_bins(&h, 200_000, &mut RngStream::new(2));
        let emp = crate::Dataset::new(
            bins.iter().map(|&b| BinSpec::new(4).unwrap().center(b as usize)).collect(),
        )
        .unwrap()
        .histogram(BinSpec::new(4).unwrap());
        for (a, b) in emp.freqs().iter().zip(h.freqs()) {
            assert!((a - b).abs() < 0.01);
        }
    }

    #[test]
    fn verdict_is_deterministic() {
        let m = Mechanism::new(Protocol::Oue, Setting::User, 0.6, &MechanismConfig::default()).unwrap();
        let data = crate::Dataset::gaussian(5_000, 0.0, 10.0, &mut RngStream::new(3)).unwrap();
        let (r, _) = crate::mechanism::collect(&data, &m, &mut RngStream::new(4)).unwrap();
        let cfg = ZeroShotConfig::default();
        let a = zero_shot_detect(&r, &m, None, &cfg, &mut RngStream::new(5)).unwrap();
        let b = zero_shot_detect(&r, &m, None, &cfg, &mut RngStream::new(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.g_ben.len(), 10);
        assert!(a.g_ben.iter().chain(&a.g_det).all(|&d| d >= 0.0));
        assert_eq!(a.polluted, a.p_value < cfg.alpha);
    }
}
