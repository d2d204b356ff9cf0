//! Seeded trial execution over a worker pool, plus per-cell summaries.

use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{bail, Context, Result};
use ldpshift_core::detect::{DetectionVerdict, MudOutcome};
use ldpshift_core::metrics::roc_auc;
use ldpshift_core::theory::{self, ChangeForm, MonteCarlo, TheoryInput};
use ldpshift_core::trial::{run_attacked_trial, TrialOptions};
use ldpshift_core::{BinSpec, Dataset, Histogram, PrivacyBudget, Protocol, RngStream, Setting};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Cell, ExperimentConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Attacked,
    Clean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub config_hash: String,
    pub cell_index: usize,
    pub cell: Cell,
    pub trial: usize,
    /// Seed of the trial's RNG stream; rerunning the cell with it reproduces
    /// the record.
    pub seed: u64,
    pub label: Label,
    pub n_honest: usize,
    pub n_fake: usize,
    pub asg: f64,
    pub sgr: Option<f64>,
    /// Consistent estimate on the evaluation grid.
    pub estimate: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detection: Option<DetectionVerdict>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mud: Option<MudOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Option<Stat> {
        if xs.is_empty() {
            return None;
        }
        let mc = MonteCarlo::from_samples(xs);
        Some(Stat { mean: mc.mean, std_err: mc.std_err, n: xs.len() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSummary {
    pub cell_index: usize,
    pub cell: Cell,
    pub asg: Stat,
    /// Over trials where SGR is defined.
    pub sgr: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectSummary {
    pub cell_index: usize,
    pub cell: Cell,
    pub attacked: usize,
    pub clean: usize,
    /// ROC AUC of the zero-shot detector scored by `1 - p`.
    pub auc: f64,
    /// Fraction of attacked trials flagged at `alpha`.
    pub detection_rate: f64,
    /// Fraction of clean trials flagged at `alpha`.
    pub false_positive_rate: f64,
    /// ROC AUC of the MUD alarm, where MUD applies.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mud_auc: Option<f64>,
}

/// Seed of the clean dataset.
pub fn dataset_seed(master: u64) -> u64 {
    RngStream::new(master).substream_seed(0)
}

pub fn trial_seed(master: u64, cell_index: usize, trial: usize) -> u64 {
    RngStream::new(RngStream::new(master).substream_seed(cell_index as u64 + 1)).substream_seed(trial as u64)
}

/// Reruns one trial exactly as the runner did.
pub fn run_trial(
    cfg: &ExperimentConfig,
    data: &Dataset,
    cell_index: usize,
    cell: &Cell,
    trial: usize,
    label: Label,
    detect: bool,
) -> Result<TrialRecord> {
    let mech = cfg.mechanism(cell)?;
    let beta = match label {
        Label::Attacked => cell.beta,
        Label::Clean => 0.0,
    };
    let spec = cfg.attack_spec(cell, beta)?;
    let options = TrialOptions {
        zero_shot: detect.then(|| cfg.zero_shot()),
        mud: detect && matches!(cell.protocol, Protocol::Oue | Protocol::Olh | Protocol::Hst),
    };
    let seed = trial_seed(cfg.seed, cell_index, trial);
    let out = run_attacked_trial(data, &mech, &spec, &options, &RngStream::new(seed))
        .with_context(|| format!("{cell}, trial {trial}"))?;
    Ok(TrialRecord {
        config_hash: cfg.hash(),
        cell_index,
        cell: *cell,
        trial,
        seed,
        label,
        n_honest: out.n_honest,
        n_fake: out.n_fake,
        asg: out.asg,
        sgr: out.sgr,
        estimate: out.estimate.into_freqs(),
        detection: out.zero_shot,
        mud: out.mud,
    })
}

fn run_jobs(cfg: &ExperimentConfig, data: &Dataset, detect: bool) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let cells = cfg.cells();
    let jobs: Vec<(usize, usize)> =
        (0..cells.len()).flat_map(|c| (0..cfg.trials).map(move |t| (c, t))).collect();
    let total = jobs.len();
    log::info!("running {total} trials over {} cells", cells.len());
    let done = AtomicUsize::new(0);
    let step = (total / 10).max(1);
    jobs.par_iter()
        .map(|&(c, t)| {
            let label = if detect && t >= cfg.trials / 2 { Label::Clean } else { Label::Attacked };
            let r = run_trial(cfg, data, c, &cells[c], t, label, detect);
            let k = done.fetch_add(1, Ordering::Relaxed) + 1;
            if k % step == 0 || k == total {
                log::info!("{k}/{total} trials done");
            }
            r
        })
        .collect()
}

/// Attacked trials for every cell.
pub fn run_attack(cfg: &ExperimentConfig, data: &Dataset) -> Result<Vec<TrialRecord>> {
    run_jobs(cfg, data, false)
}

/// The first half of each cell's trials is attacked, the second half clean.
pub fn run_detect(cfg: &ExperimentConfig, data: &Dataset) -> Result<Vec<TrialRecord>> {
    if cfg.trials < 2 || cfg.trials % 2 != 0 {
        bail!("detect needs an even number of trials (half attacked, half clean), got {}", cfg.trials);
    }
    run_jobs(cfg, data, true)
}

fn group(records: &[TrialRecord]) -> Vec<(usize, Cell, Vec<&TrialRecord>)> {
    let mut out: Vec<(usize, Cell, Vec<&TrialRecord>)> = Vec::new();
    for r in records {
        match out.iter_mut().find(|(i, _, _)| *i == r.cell_index) {
            Some((_, _, v)) => v.push(r),
            None => out.push((r.cell_index, r.cell, vec![r])),
        }
    }
    out
}

pub fn summarize_attack(records: &[TrialRecord]) -> Vec<AttackSummary> {
    group(records)
        .into_iter()
        .map(|(cell_index, cell, rs)| {
            let asg: Vec<f64> = rs.iter().map(|r| r.asg).collect();
            let sgr: Vec<f64> = rs.iter().filter_map(|r| r.sgr).collect();
            AttackSummary { cell_index, cell, asg: Stat::of(&asg).expect("cells have trials"), sgr: Stat::of(&sgr) }
        })
        .collect()
}

fn rate(flags: impl Iterator<Item = bool>) -> f64 {
    let (mut k, mut n) = (0usize, 0usize);
    for f in flags {
        k += f as usize;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

pub fn summarize_detect(records: &[TrialRecord]) -> Result<Vec<DetectSummary>> {
    group(records)
        .into_iter()
        .map(|(cell_index, cell, rs)| {
            let labels: Vec<bool> = rs.iter().map(|r| r.label == Label::Attacked).collect();
            let verdicts: Vec<&DetectionVerdict> = rs
                .iter()
                .map(|r| r.detection.as_ref().context("record lacks a detection verdict"))
                .collect::<Result<_>>()?;
            let scores: Vec<f64> = verdicts.iter().map(|v| 1.0 - v.p_value).collect();
            let auc = roc_auc(&scores, &labels)?;
            let flagged = |want: bool| rate(rs.iter().zip(&verdicts).filter(|(r, _)| (r.label == Label::Attacked) == want).map(|(_, v)| v.polluted));
            let mud_auc = if rs.iter().all(|r| r.mud.is_some()) {
                let alarms: Vec<f64> = rs.iter().map(|r| if r.mud.unwrap().alarm { 1.0 } else { 0.0 }).collect();
                Some(roc_auc(&alarms, &labels)?)
            } else {
                None
            };
            Ok(DetectSummary {
                cell_index,
                cell,
                attacked: labels.iter().filter(|&&l| l).count(),
                clean: labels.iter().filter(|&&l| !l).count(),
                auc,
                detection_rate: flagged(true),
                false_positive_rate: flagged(false),
                mud_auc,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryRow {
    pub protocol: Protocol,
    pub setting: Setting,
    pub eps: f64,
    pub g: usize,
    pub beta: f64,
    /// Expected ASG under the estimator-consistent form.
    pub analytic: f64,
    /// Expected ASG under the `q/(p-q)` form.
    pub analytic_pq: f64,
    /// `Σ_v Σ_{i≤v} E(Δf_i)` (the negated expected ASG).
    pub cumulative_change: f64,
    pub monte_carlo: f64,
    pub monte_carlo_se: f64,
    pub ratio: f64,
    /// `(monte_carlo - analytic) / se`.
    pub z: f64,
}

/// Analytic against simulated raw-aggregation ASG. HST uses `g = 2`.
pub fn run_theory(
    protocol: Protocol,
    settings: &[Setting],
    eps: &[f64],
    g_list: &[usize],
    beta: f64,
    truth: &Histogram,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<TheoryRow>> {
    let g_list: Vec<usize> = match protocol {
        Protocol::Olh => g_list.to_vec(),
        Protocol::Hst => vec![2],
        other => bail!("theory covers OLH and HST, not {other}"),
    };
    let mut jobs = Vec::new();
    for &setting in settings {
        for &e in eps {
            for &g in &g_list {
                jobs.push((setting, e, g));
            }
        }
    }
    jobs.par_iter()
        .enumerate()
        .map(|(k, &(setting, e, g))| {
            let input = TheoryInput::new(truth.clone(), beta, PrivacyBudget::new(e)?, g, setting)?;
            let analytic = theory::expected_asg(&input)?;
            let mc = theory::simulate_raw_asg(&input, n, trials, &mut RngStream::new(seed).substream(k as u64))?;
            Ok(TheoryRow {
                protocol,
                setting,
                eps: e,
                g,
                beta,
                analytic,
                analytic_pq: theory::expected_asg_with(ChangeForm::PQ, &input)?,
                cumulative_change: theory::cumulative_change(ChangeForm::Estimator, &input)?,
                monte_carlo: mc.mean,
                monte_carlo_se: mc.std_err,
                ratio: mc.mean / analytic,
                z: (mc.mean - analytic) / mc.std_err,
            })
        })
        .collect()
}

/// Uniform truth over `bins`.
pub fn uniform_truth(bins: usize) -> Result<Histogram> {
    Ok(Histogram::uniform(BinSpec::new(bins)?))
}
