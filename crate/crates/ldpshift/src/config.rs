//! Experiment configuration: JSON file and command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ldpshift_core::attacks::{Attack, AttackSpec, SwRange, DEFAULT_OLH_POOL};
use ldpshift_core::detect::ZeroShotConfig;
use ldpshift_core::sw::EmsConfig;
use ldpshift_core::{BinSpec, Mechanism, MechanismConfig, Protocol, Setting};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// Where the clean data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSource {
    /// `n` draws from `N(mu, sigma²)`, min/max normalized.
    Gaussian { n: usize, mu: f64, sigma: f64 },
    /// `n` evenly spaced points `(j + 0.5)/n`.
    Flat { n: usize },
    /// One normalized value per line.
    File { path: PathBuf },
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Gaussian { n: 100_000, mu: 0.0, sigma: 10.0 }
    }
}

impl fmt::Display for DatasetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSource::Gaussian { n, mu, sigma } => write!(f, "gaussian:{n}:{mu}:{sigma}"),
            DatasetSource::Flat { n } => write!(f, "flat:{n}"),
            DatasetSource::File { path } => write!(f, "{}", path.display()),
        }
    }
}

impl FromStr for DatasetSource {
    type Err = ConfigError;

    /// `gaussian[:n[:mu:sigma]]`, `flat[:n]`, otherwise a file path.
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| invalid(format!("bad number {t:?} in dataset {s:?}")));
        let count = |t: &str| t.parse::<usize>().map_err(|_| invalid(format!("bad count {t:?} in dataset {s:?}")));
        match head {
            "gaussian" => {
                let DatasetSource::Gaussian { mut n, mut mu, mut sigma } = DatasetSource::default() else {
                    unreachable!()
                };
                match rest.as_slice() {
                    [] => {}
                    [a] => n = count(a)?,
                    [a, b, c] => {
                        n = count(a)?;
                        mu = num(b)?;
                        sigma = num(c)?;
                    }
                    _ => return Err(invalid("expected gaussian[:n[:mu:sigma]]")),
                }
                Ok(DatasetSource::Gaussian { n, mu, sigma })
            }
            "flat" => match rest.as_slice() {
                [] => Ok(DatasetSource::Flat { n: 100_000 }),
                [a] => Ok(DatasetSource::Flat { n: count(a)? }),
                _ => Err(invalid("expected flat[:n]")),
            },
            _ => Ok(DatasetSource::File { path: PathBuf::from(s) }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectParams {
    /// Rounds `m` of the zero-shot detector.
    pub m: usize,
    pub alpha: f64,
}

impl Default for DetectParams {
    fn default() -> Self {
        let z = ZeroShotConfig::default();
        Self { m: z.rounds, alpha: z.alpha }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub protocols: Vec<Protocol>,
    /// Settings swept for OLH and HST; other protocols ignore them.
    pub settings: Vec<Setting>,
    /// Attack strategies. `crafted` on SW uses `sw_range`.
    pub attacks: Vec<Attack>,
    pub sw_range: SwRange,
    pub eps: Vec<f64>,
    pub beta: Vec<f64>,
    pub trials: usize,
    pub bins: usize,
    pub sw_bins: usize,
    pub seed: u64,
    pub olh_pool: usize,
    /// Fixed OLH hash range instead of `⌊e^ε + 1⌋`.
    pub olh_range: Option<usize>,
    pub detect: DetectParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSource::default(),
            protocols: vec![Protocol::Oue],
            settings: vec![Setting::User],
            attacks: vec![Attack::Crafted],
            sw_range: SwRange::AboveOne,
            eps: vec![1.0],
            beta: vec![0.05],
            trials: 10,
            bins: 32,
            sw_bins: 512,
            seed: 0,
            olh_pool: DEFAULT_OLH_POOL,
            olh_range: None,
            detect: DetectParams::default(),
        }
    }
}

/// One point of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub protocol: Protocol,
    /// `None` for protocols without a setting.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub setting: Option<Setting>,
    pub attack: Attack,
    pub eps: f64,
    pub beta: f64,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.protocol)?;
        if let Some(s) = self.setting {
            write!(f, "-{s}")?;
        }
        write!(f, " {} eps={} beta={}", self.attack, self.eps, self.beta)
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn mechanism_config(&self) -> Result<MechanismConfig, ConfigError> {
        let bins = BinSpec::new(self.bins).map_err(|e| invalid(format!("bins: {e}")))?;
        let sw_bins = BinSpec::new(self.sw_bins).map_err(|e| invalid(format!("sw-bins: {e}")))?;
        Ok(MechanismConfig { bins, sw_bins, olh_range: self.olh_range, ems: EmsConfig::default() })
    }

    pub fn zero_shot(&self) -> ZeroShotConfig {
        ZeroShotConfig { rounds: self.detect.m, alpha: self.detect.alpha }
    }

    /// Attack strategy actually used for `protocol`.
    pub fn resolve_attack(&self, protocol: Protocol, attack: Attack) -> Attack {
        match (protocol, attack) {
            (Protocol::Sw, Attack::Crafted) => Attack::Sw(self.sw_range),
            _ => attack,
        }
    }

    /// Cross product of protocols (with settings where they apply), attacks,
    /// ε and β, in that nesting order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &protocol in &self.protocols {
            let settings: Vec<Option<Setting>> = if protocol.has_setting() {
                self.settings.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            for &setting in &settings {
                for &attack in &self.attacks {
                    let attack = self.resolve_attack(protocol, attack);
                    for &eps in &self.eps {
                        for &beta in &self.beta {
                            out.push(Cell { protocol, setting, attack, eps, beta });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn mechanism(&self, cell: &Cell) -> Result<Mechanism, ConfigError> {
        Mechanism::new(cell.protocol, cell.setting.unwrap_or_default(), cell.eps, &self.mechanism_config()?)
            .map_err(|e| invalid(format!("{cell}: {e}")))
    }

    pub fn attack_spec(&self, cell: &Cell, beta: f64) -> Result<AttackSpec, ConfigError> {
        let mut spec = AttackSpec::new(cell.attack, beta).map_err(|e| invalid(format!("{cell}: {e}")))?;
        spec.olh_pool = self.olh_pool;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        for (name, empty) in [
            ("protocols", self.protocols.is_empty()),
            ("settings", self.settings.is_empty()),
            ("attacks", self.attacks.is_empty()),
            ("eps", self.eps.is_empty()),
            ("beta", self.beta.is_empty()),
        ] {
            if empty {
                return Err(invalid(format!("{name} must not be empty")));
            }
        }
        if let Some(&e) = self.eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(invalid(format!("eps must be positive and finite, got {e}")));
        }
        if let Some(&b) = self.beta.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(invalid(format!("beta must lie in [0, 1], got {b}")));
        }
        if self.olh_pool == 0 {
            return Err(invalid("olh-pool must be at least 1"));
        }
        if self.detect.m < 1 {
            return Err(invalid("detect-m must be at least 1"));
        }
        if !(self.detect.alpha > 0.0 && self.detect.alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {}", self.detect.alpha)));
        }
        if let DatasetSource::Gaussian { n: 0, .. } | DatasetSource::Flat { n: 0 } = self.dataset {
            return Err(invalid("dataset size must be at least 1"));
        }
        self.mechanism_config()?;
        for cell in self.cells() {
            let mech = self.mechanism(&cell)?;
            self.attack_spec(&cell, cell.beta)?.check(&mech).map_err(|e| invalid(format!("{cell}: {e}")))?;
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
