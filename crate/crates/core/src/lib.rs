#![no_std]

//! Local differential privacy (LDP) frequency oracles and the machinery for
//! studying distribution-shift data poisoning against them.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * binning, histograms and datasets on the unit interval ([`bins`],
//!   [`histogram`], [`dataset`]),
//! * the categorical frequency oracles GRR, OUE, OLH and HST ([`oracles`]) and
//!   the Square Wave mechanism with EMS reconstruction ([`sw`]),
//! * Norm-Sub consistency ([`postprocess`]),
//! * the baseline and crafted shift attacks ([`attacks`]) and single-trial
//!   orchestration ([`trial`]),
//! * shift metrics, Wasserstein distance and ROC/AUC ([`metrics`]),
//! * zero-shot and MUD detection ([`detect`]),
//! * closed-form expected frequency change for local hashing ([`theory`]).
//!
//! Every randomized routine takes an explicit RNG, so results are a pure
//! function of inputs and seed.

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod attacks;
pub mod bins;
pub mod budget;
pub mod dataset;
pub mod detect;
mod error;
pub mod histogram;
pub mod mechanism;
pub mod metrics;
pub mod oracles;
pub mod postprocess;
pub mod reports;
pub mod rng;
pub mod special;
pub mod sw;
pub mod theory;
pub mod trial;

pub use bins::BinSpec;
pub use budget::PrivacyBudget;
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use histogram::{Histogram, HistogramKind};
pub use mechanism::{Mechanism, MechanismConfig, Protocol, ServerAssignment, Setting};
pub use reports::{Report, Reports};
pub use rng::RngStream;
