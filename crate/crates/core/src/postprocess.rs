//! Norm-Sub: shift every frequency by a common α and clip at zero so the
//! estimate becomes a probability vector.

use alloc::vec::Vec;

use crate::{Error, Histogram, Result};

const TOLERANCE: f64 = 1e-12;

/// Shift α solving `Σ max(h_i + α, 0) = 1`.
pub fn norm_sub_alpha(h: &[f64]) -> Result<f64> {
    if h.is_empty() {
        return Err(Error::Empty("histogram"));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mass = |a: f64| h.iter().map(|&v| (v + a).max(0.0)).sum::<f64>();
    let min = h.iter().copied().fold(f64::INFINITY, f64::min);
    let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = (-max - 1.0, 1.0 - min);
    let mut alpha = 0.5 * (lo + hi);
    for _ in 0..2000 {
        alpha = 0.5 * (lo + hi);
        let s = mass(alpha);
        if (s - 1.0).abs() <= TOLERANCE {
            break;
        }
        if s < 1.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
    }
    // Bisection pins down the active set; solve on it exactly.
    let (count, sum) = h
        .iter()
        .filter(|&&v| v + alpha > 0.0)
        .fold((0usize, 0.0), |(c, s), &v| (c + 1, s + v));
    if count > 0 {
        let exact = (1.0 - sum) / count as f64;
        let same_set = h.iter().all(|&v| (v + alpha > 0.0) == (v + exact > 0.0));
        if same_set && (mass(exact) - 1.0).abs() <= (mass(alpha) - 1.0).abs() {
            alpha = exact;
        }
    }
    Ok(alpha)
}

/// Projects a raw estimate onto the simplex.
pub fn norm_sub(h: &Histogram) -> Result<Histogram> {
    let alpha = norm_sub_alpha(h.freqs())?;
    let f: Vec<f64> = h.freqs().iter().map(|&v| (v + alpha).max(0.0)).collect();
    Histogram::consistent(f)
}
