//! JSON-lines emission: one object per record, then a summary object.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::runner::{AttackSummary, DetectSummary, TheoryRow, TrialRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub attack: Option<Vec<AttackSummary>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detect: Option<Vec<DetectSummary>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Line {
    Trial(TrialRecord),
    Theory(TheoryRow),
    Summary(Summary),
}

pub struct Emitter {
    out: BufWriter<Box<dyn Write>>,
}

impl Emitter {
    /// Writes to `path`, or standard output when absent.
    pub fn open(path: Option<&Path>) -> Result<Self> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
            None => Box::new(io::stdout().lock()),
        };
        Ok(Self { out: BufWriter::new(sink) })
    }

    pub fn emit(&mut self, line: &Line) -> Result<()> {
        serde_json::to_writer(&mut self.out, line)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn parse_lines(text: &str) -> Result<Vec<Line>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(k, l)| serde_json::from_str(l).with_context(|| format!("line {}", k + 1)))
        .collect()
}
