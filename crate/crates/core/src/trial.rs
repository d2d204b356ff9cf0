//! One Monte-Carlo trial: honest collection for `n_g` users, fake reports for
//! `n_f` users, estimation on the evaluation grid and shift metrics.

use alloc::vec::Vec;

use rand::seq::index;

use crate::attacks::{craft, AttackSpec};
use crate::detect::{mud_detect, zero_shot_detect, DetectionVerdict, MudOutcome, ZeroShotConfig};
use crate::metrics::{asg, sgr};
use crate::{Dataset, Histogram, Mechanism, Reports, Result, RngStream, ServerAssignment};

/// Optional detector runs on the collected transcript.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrialOptions {
    pub zero_shot: Option<ZeroShotConfig>,
    pub mud: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Empirical histogram of the full clean dataset on the evaluation grid.
    pub truth: Histogram,
    /// Consistent estimate from the attacked transcript on the evaluation grid.
    pub estimate: Histogram,
    pub asg: f64,
    /// Undefined when no users are fake.
    pub sgr: Option<f64>,
    pub n_honest: usize,
    pub n_fake: usize,
    pub zero_shot: Option<DetectionVerdict>,
    pub mud: Option<MudOutcome>,
}

/// A full transcript: honest reports followed by fake ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub reports: Reports,
    pub assignment: Option<ServerAssignment>,
    pub n_fake: usize,
}

const STREAM_USERS: u64 = 0;
const STREAM_ASSIGNMENT: u64 = 1;
const STREAM_HONEST: u64 = 2;
const STREAM_FAKE: u64 = 3;
const STREAM_DETECT: u64 = 4;

/// Collects the attacked transcript. A random subset of `n - n_f` data
/// points stays honest; fake users take the remaining slots.
pub fn collect_attacked(
    data: &Dataset,
    mechanism: &Mechanism,
    spec: &AttackSpec,
    rng: &RngStream,
) -> Result<Transcript> {
    spec.check(mechanism)?;
    let n = data.len();
    let n_fake = spec.fake_count(n);
    let n_honest = n - n_fake;
    let honest: Vec<f64> = if n_fake == 0 {
        data.values().to_vec()
    } else {
        let mut picked = index::sample(&mut rng.substream(STREAM_USERS), n, n_honest).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| data.values()[i]).collect()
    };
    let assignment = mechanism.draw_assignment(n, &mut rng.substream(STREAM_ASSIGNMENT));
    let seeds = assignment.as_ref().map(|a| a.seeds());
    let mut reports =
        mechanism.perturb_values(&honest, seeds.map(|s| &s[..n_honest]), &mut rng.substream(STREAM_HONEST))?;
    let fakes = craft(mechanism, spec, n_fake, seeds.map(|s| &s[n_honest..]), &mut rng.substream(STREAM_FAKE))?;
    reports.append(fakes)?;
    Ok(Transcript { reports, assignment, n_fake })
}

pub fn run_attacked_trial(
    data: &Dataset,
    mechanism: &Mechanism,
    spec: &AttackSpec,
    options: &TrialOptions,
    rng: &RngStream,
) -> Result<TrialOutcome> {
    let t = collect_attacked(data, mechanism, spec, rng)?;
    let seeds = t.assignment.as_ref().map(|a| a.seeds());
    let truth = data.histogram(mechanism.eval_bins());
    let estimate = mechanism.estimate_eval(&t.reports, seeds)?;
    let n = data.len();
    let realized_beta = t.n_fake as f64 / n as f64;
    let zero_shot = match &options.zero_shot {
        Some(cfg) => {
            Some(zero_shot_detect(&t.reports, mechanism, seeds, cfg, &mut rng.substream(STREAM_DETECT))?)
        }
        None => None,
    };
    let mud = if options.mud { Some(mud_detect(&t.reports, mechanism, seeds)?) } else { None };
    Ok(TrialOutcome {
        asg: asg(&truth, &estimate)?,
        sgr: sgr(&truth, &estimate, realized_beta)?,
        truth,
        estimate,
        n_honest: n - t.n_fake,
        n_fake: t.n_fake,
        zero_shot,
        mud,
    })
}
