//! Expected frequency change and expected ASG of the local-hashing attacks
//! before post-processing.
//!
//! Honest users contribute `(1-β) n` reports drawn from `X`; fake users in
//! the User setting support only bin `m`, and in the Server setting support
//! bin `m` plus each other bin with probability `1/g`. Under the aggregation
//! `Φ_i = (C_i - n/g) / (n (p - 1/g))` this gives
//!
//! * User, `i ≠ m`: `-β f_i - β (1/g) / (p - 1/g)`
//! * Server, `i ≠ m`: `-β f_i`
//! * both, `i = m`: `-β f_m + β (1 - 1/g) / (p - 1/g)`
//!
//! Two alternative closed forms are kept for comparison: one that uses
//! `q = 1/(e^ε+g-1)` in place of `1/g`, and one that writes the User
//! off-target term as `-β/(g-2)`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, RngCore};

use crate::histogram::cdf;
use crate::metrics::asg;
use crate::oracles::OlhParams;
use crate::{Error, Histogram, PrivacyBudget, Result, Setting};

/// Which closed form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ChangeForm {
    /// Exact expectation under the OLH estimator (normalizes by `p - 1/g`).
    #[default]
    Estimator,
    /// Normalizes by `p - q` and subtracts `q` for honest background support.
    PQ,
    /// As [`ChangeForm::PQ`] but with the User off-target term `-β/(g-2)`;
    /// undefined at `g = 2`.
    GMinusTwo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryInput {
    pub truth: Histogram,
    pub beta: f64,
    pub epsilon: PrivacyBudget,
    pub g: usize,
    pub setting: Setting,
}

impl TheoryInput {
    pub fn new(truth: Histogram, beta: f64, epsilon: PrivacyBudget, g: usize, setting: Setting) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidBeta(beta));
        }
        if g < 2 {
            return Err(Error::InvalidHashRange(g));
        }
        Ok(Self { truth, beta, epsilon, g, setting })
    }

    /// HST behaves as local hashing with `g = 2`.
    pub fn hst(truth: Histogram, beta: f64, epsilon: PrivacyBudget, setting: Setting) -> Result<Self> {
        Self::new(truth, beta, epsilon, 2, setting)
    }

    fn p(&self) -> f64 {
        let e = self.epsilon.exp();
        e / (e + self.g as f64 - 1.0)
    }

    fn q(&self) -> f64 {
        1.0 / (self.epsilon.exp() + self.g as f64 - 1.0)
    }
}

/// `E(Δf_i)` for 1-indexed bin `i` under the given closed form.
pub fn expected_freq_change_with(form: ChangeForm, i: usize, input: &TheoryInput) -> Result<f64> {
    let m = input.truth.len();
    input.truth.bins().check_index(i)?;
    let beta = input.beta;
    let f = input.truth.get(i);
    let g = input.g as f64;
    let (p, q) = (input.p(), input.q());
    let target = i == m;
    Ok(match form {
        ChangeForm::Estimator => {
            let d = p - 1.0 / g;
            if target {
                -beta * f + beta * (1.0 - 1.0 / g) / d
            } else {
                match input.setting {
                    Setting::User => -beta * f - beta * (1.0 / g) / d,
                    Setting::Server => -beta * f,
                }
            }
        }
        ChangeForm::PQ | ChangeForm::GMinusTwo => {
            if target {
                beta / (p - q) - beta * f - beta / ((p - q) * g)
            } else {
                match (input.setting, form) {
                    (Setting::Server, _) => -beta * f,
                    (Setting::User, ChangeForm::PQ) => -beta * f - beta * q / (p - q),
                    _ => {
                        if input.g == 2 {
                            return Err(Error::Domain("the g-2 form is singular at g = 2"));
                        }
                        -beta * f - beta / (g - 2.0)
                    }
                }
            }
        }
    })
}

/// `E(Δf_i)` under the estimator-consistent form.
pub fn expected_freq_change(i: usize, input: &TheoryInput) -> Result<f64> {
    expected_freq_change_with(ChangeForm::Estimator, i, input)
}

pub fn expected_changes(form: ChangeForm, input: &TheoryInput) -> Result<Vec<f64>> {
    (1..=input.truth.len()).map(|i| expected_freq_change_with(form, i, input)).collect()
}

/// `Σ_v Σ_{i≤v} E(Δf_i)`: the cumulative change of the estimate's CDF.
pub fn cumulative_change(form: ChangeForm, input: &TheoryInput) -> Result<f64> {
    Ok(cdf(&expected_changes(form, input)?).iter().sum())
}

/// Expected ASG `= -Σ_v Σ_{i≤v} E(Δf_i)`, matching the sign of
/// [`crate::metrics::asg`].
pub fn expected_asg_with(form: ChangeForm, input: &TheoryInput) -> Result<f64> {
    Ok(-cumulative_change(form, input)?)
}

pub fn expected_asg(input: &TheoryInput) -> Result<f64> {
    expected_asg_with(ChangeForm::Estimator, input)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonteCarlo {
    pub mean: f64,
    pub std_err: f64,
    pub std_dev: f64,
    pub trials: usize,
}

impl MonteCarlo {
    pub fn from_samples(xs: &[f64]) -> Self {
        let k = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / k;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
        Self { mean, std_err: (var / k).sqrt(), std_dev: var.sqrt(), trials: xs.len() }
    }
}

/// One raw-aggregation ASG sample of the OLH attack with `n` users.
///
/// Honest bins are drawn i.i.d. from the truth. In the User setting every
/// fake report supports bin `m` only; in the Server setting fake user `j`
/// reports `H_j(m)` under an assigned random seed.
pub fn simulate_raw_asg_once<R: RngCore + ?Sized>(input: &TheoryInput, n: usize, rng: &mut R) -> Result<f64> {
    let bins = input.truth.bins();
    let m = bins.len();
    let params = OlhParams::with_range(input.epsilon, bins, input.g)?;
    let n_f = ((input.beta * n as f64).round() as usize).min(n);
    let n_g = n - n_f;
    let honest = crate::mechanism::sample_bins(&input.truth, n_g, rng);
    let mut seeds = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for &x in &honest {
        let s = rng.next_u64();
        seeds.push(s);
        values.push(params.perturb(x as usize, s, rng));
    }
    let mut extra_target = 0u64;
    match input.setting {
        Setting::User => extra_target = n_f as u64,
        Setting::Server => {
            for _ in 0..n_f {
                let s = rng.next_u64();
                seeds.push(s);
                values.push(params.hash(s, m));
            }
        }
    }
    let mut counts = params.support_counts(&seeds, &values)?;
    counts[m - 1] += extra_target;
    let inv_g = 1.0 / input.g as f64;
    let nf = n as f64;
    let raw: Vec<f64> = counts.iter().map(|&c| (c as f64 - nf * inv_g) / (nf * (params.p() - inv_g))).collect();
    asg(&input.truth, &Histogram::raw(raw)?)
}

pub fn simulate_raw_asg<R: Rng + ?Sized>(input: &TheoryInput, n: usize, trials: usize, rng: &mut R) -> Result<MonteCarlo> {
    if trials == 0 || n == 0 {
        return Err(Error::Empty("Monte-Carlo trials"));
    }
    let xs: Vec<f64> = (0..trials).map(|_| simulate_raw_asg_once(input, n, rng)).collect::<Result<_>>()?;
    Ok(MonteCarlo::from_samples(&xs))
}
