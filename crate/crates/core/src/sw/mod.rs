//! Square Wave randomizer and EMS reconstruction.

mod channel;
mod ems;
mod params;

pub use channel::{build_transition, TransitionMatrix};
pub use ems::{cell_counts, ems_from_counts, ems_reconstruct, EmsConfig, EmsOutcome};
pub use params::{SwParams, DEFAULT_SW_BINS};

use alloc::vec::Vec;

use crate::{BinSpec, Error, Histogram, HistogramKind, Result};

/// Sums consecutive blocks of a fine histogram onto a coarser grid.
pub fn coarsen(h: &Histogram, target: BinSpec) -> Result<Histogram> {
    let (fine, coarse) = (h.len(), target.len());
    if fine % coarse != 0 {
        return Err(Error::NotDivisible(fine, coarse));
    }
    let f: Vec<f64> = h.freqs().chunks_exact(fine / coarse).map(|c| c.iter().sum()).collect();
    match h.kind() {
        HistogramKind::Consistent => Histogram::consistent(f),
        HistogramKind::Raw => Histogram::raw(f),
    }
}
