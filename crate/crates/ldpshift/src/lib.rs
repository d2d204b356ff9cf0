//! Experiment harness for LDP distribution-shift poisoning studies: sweep
//! configuration, dataset files, seeded trial execution and JSON-lines output.

pub mod config;
pub mod data;
pub mod output;
pub mod runner;
