//! Shift metrics and ROC scoring.
//!
//! ASG is an unnormalized sum over bins; W1 carries the bin width `1/m` so
//! it is a distance on [0, 1]. On the same pair `W1 ≥ |ASG| / m`.

use alloc::vec::Vec;


use crate::{Error, Histogram, Result};

/// Absolute shift gain `Σ_v [P(X,v) - P(Xa,v)]`; positive means `Xa` moved right.
pub fn asg(x: &Histogram, xa: &Histogram) -> Result<f64> {
    x.same_grid(xa)?;
    Ok(x.cdf().iter().zip(xa.cdf()).map(|(a, b)| a - b).sum())
}

/// `(1-β)·X + β·e_m`: the input skew produced by injecting the maximum.
pub fn baseline_skew(x: &Histogram, beta: f64) -> Result<Histogram> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidBeta(beta));
    }
    let m = x.len();
    let mut f: Vec<f64> = x.freqs().iter().map(|v| (1.0 - beta) * v).collect();
    f[m - 1] += beta;
    Histogram::consistent(f)
}

/// Shift gain ratio `ASG(X, Xa) / ASG(X, baseline_skew(X, β))`.
///
/// `None` when the ratio is undefined: `β = 0` or `X` already sits on the
/// last bin.
pub fn sgr(x: &Histogram, xa: &Histogram, beta: f64) -> Result<Option<f64>> {
    let num = asg(x, xa)?;
    let den = asg(x, &baseline_skew(x, beta)?)?;
    if beta == 0.0 || den.abs() < 1e-15 {
        return Ok(None);
    }
    Ok(Some(num / den))
}

/// First Wasserstein distance between histograms on `m` bins of [0, 1].
pub fn wasserstein1(a: &Histogram, b: &Histogram) -> Result<f64> {
    a.same_grid(b)?;
    Ok(wasserstein1_weights(a.freqs(), b.freqs(), a.bins().width()))
}

/// W1 between two weight vectors on a shared grid of the given spacing.
pub fn wasserstein1_weights(a: &[f64], b: &[f64], spacing: f64) -> f64 {
    let (mut ca, mut cb, mut s) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ca += x;
        cb += y;
        s += (ca - cb).abs();
    }
    s * spacing
}

/// ASG, SGR and W1 of one (truth, estimate) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricResult {
    pub asg: f64,
    pub sgr: Option<f64>,
    pub w1: f64,
}

pub fn evaluate(x: &Histogram, xa: &Histogram, beta: f64) -> Result<MetricResult> {
    Ok(MetricResult { asg: asg(x, xa)?, sgr: sgr(x, xa, beta)?, w1: wasserstein1(x, xa)? })
}

fn check_classes(scores: &[f64], positive: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != positive.len() {
        return Err(Error::Domain("scores and labels differ in length"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite);
    }
    let pos = positive.iter().filter(|&&p| p).count();
    let neg = positive.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Domain("ROC needs both classes"));
    }
    Ok((pos, neg))
}

/// Probability that a random positive outscores a random negative, ties
/// counted half. Computed from mid-ranks.
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> Result<f64> {
    let (pos, neg) = check_classes(scores, positive)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("no NaN"));
    let mut rank_sum = 0.0;
    let mut k = 0;
    while k < order.len() {
        let mut end = k;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[k]] {
            end += 1;
        }
        // Ranks k+1..=end+1 share their average.
        let mid = (k + end + 2) as f64 / 2.0;
        rank_sum += mid * order[k..=end].iter().filter(|&&i| positive[i]).count() as f64;
        k = end + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// ROC points `(false positive rate, true positive rate)` sweeping the
/// threshold from high to low scores, one point per distinct score.
pub fn roc_curve(scores: &[f64], positive: &[bool]) -> Result<Vec<(f64, f64)>> {
    let (pos, neg) = check_classes(scores, positive)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("no NaN"));
    let mut pts = Vec::with_capacity(scores.len() + 1);
    pts.push((0.0, 0.0));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if positive[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        pts.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(pts)
}

/// Trapezoidal area under a ROC curve.
pub fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum()
}
