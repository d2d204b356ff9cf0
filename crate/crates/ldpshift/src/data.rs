//! Dataset files: one value per line.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ldpshift_core::{Dataset, Error as CoreError, RngStream};

use crate::config::DatasetSource;

/// Builds the clean dataset. Synthetic sources draw from `seed`.
pub fn load(source: &DatasetSource, seed: u64) -> Result<Dataset> {
    Ok(match source {
        DatasetSource::Gaussian { n, mu, sigma } => Dataset::gaussian(*n, *mu, *sigma, &mut RngStream::new(seed))?,
        DatasetSource::Flat { n } => flat(*n)?,
        DatasetSource::File { path } => {
            let values = read_values(path)?;
            Dataset::new(values).with_context(|| format!("{}: values must lie in [0, 1]; run `ingest` first", path.display()))?
        }
    })
}

pub fn flat(n: usize) -> Result<Dataset> {
    Ok(Dataset::new((0..n).map(|j| (j as f64 + 0.5) / n as f64).collect())?)
}

/// Parses one value per line, or a single-column CSV with an optional
/// header. Blank lines are skipped.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        if field.contains(',') {
            bail!("line {}: expected a single column, found {field:?}", k + 1);
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => bail!("line {}: non-finite value {field:?}", k + 1),
            Err(_) if out.is_empty() && k == first_nonblank(text) => continue,
            Err(_) => bail!("line {}: not a number: {field:?}", k + 1),
        }
    }
    if out.is_empty() {
        bail!("no values found");
    }
    Ok(out)
}

fn first_nonblank(text: &str) -> usize {
    text.lines().position(|l| !l.trim().is_empty()).unwrap_or(0)
}

pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_values(&text).with_context(|| format!("{}", path.display()))
}

/// Normalizes a raw column linearly onto `[0, 1]`.
pub fn ingest(raw: &[f64]) -> Result<Dataset> {
    Dataset::normalize(raw).map_err(|e| match e {
        CoreError::ConstantInput => anyhow!("column is constant; cannot normalize onto [0, 1]"),
        other => anyhow!(other),
    })
}

pub fn write_values<W: Write>(values: &[f64], out: W) -> io::Result<()> {
    let mut w = BufWriter::new(out);
    for v in values {
        writeln!(w, "{v}")?;
    }
    w.flush()
}
