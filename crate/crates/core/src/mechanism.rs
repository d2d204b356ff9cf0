//! Protocol-independent front end: one [`Mechanism`] value perturbs inputs,
//! aggregates report transcripts and produces consistent estimates.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, RngCore};

use crate::oracles::{BitRows, GrrParams, HstParams, OlhParams, OueParams};
use crate::postprocess::norm_sub;
use crate::sw::{coarsen, ems_reconstruct, EmsConfig, SwParams, DEFAULT_SW_BINS};
use crate::{BinSpec, Dataset, Error, Histogram, PrivacyBudget, Reports, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Protocol {
    Grr,
    Oue,
    Olh,
    Hst,
    Sw,
}

impl Protocol {
    pub const ALL: [Protocol; 5] = [Protocol::Grr, Protocol::Oue, Protocol::Olh, Protocol::Hst, Protocol::Sw];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Grr => "grr",
            Protocol::Oue => "oue",
            Protocol::Olh => "olh",
            Protocol::Hst => "hst",
            Protocol::Sw => "sw",
        }
    }

    /// Whether the User/Server distinction applies.
    pub fn has_setting(self) -> bool {
        matches!(self, Protocol::Olh | Protocol::Hst)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or(Error::Unsupported("unknown protocol name"))
    }
}

/// Who picks the per-user hash function or public vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Setting {
    #[default]
    User,
    Server,
}

impl Setting {
    pub fn name(self) -> &'static str {
        match self {
            Setting::User => "user",
            Setting::Server => "server",
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("user") {
            Ok(Setting::User)
        } else if s.eq_ignore_ascii_case("server") {
            Ok(Setting::Server)
        } else {
            Err(Error::Unsupported("unknown setting name"))
        }
    }
}

/// Per-user seeds chosen by the server before collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerAssignment {
    seeds: Vec<u64>,
}

impl ServerAssignment {
    pub fn new(seeds: Vec<u64>) -> Self {
        Self { seeds }
    }

    pub fn draw<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self { seeds: (0..n).map(|_| rng.next_u64()).collect() }
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }
}

/// Grid sizes and reconstruction settings shared by all protocols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismConfig {
    /// `m_o`: input grid for CFOs and evaluation grid for every protocol.
    pub bins: BinSpec,
    /// `m_s`: SW aggregation grid.
    pub sw_bins: BinSpec,
    /// OLH hash range; `None` selects `⌊e^ε + 1⌋`.
    pub olh_range: Option<usize>,
    pub ems: EmsConfig,
}

impl Default for MechanismConfig {
    fn default() -> Self {
        Self {
            bins: BinSpec::new(32).expect("32 bins"),
            sw_bins: BinSpec::new(DEFAULT_SW_BINS).expect("512 bins"),
            olh_range: None,
            ems: EmsConfig::default(),
        }
    }
}

/// A configured LDP protocol.
#[derive(Debug, Clone, PartialEq)]
pub enum Mechanism {
    Grr(GrrParams),
    Oue(OueParams),
    Olh { params: OlhParams, setting: Setting },
    Hst { params: HstParams, setting: Setting },
    Sw { params: SwParams, eval_bins: BinSpec, ems: EmsConfig },
}

impl Mechanism {
    pub fn new(protocol: Protocol, setting: Setting, epsilon: f64, config: &MechanismConfig) -> Result<Self> {
        let eps = PrivacyBudget::new(epsilon)?;
        let bins = config.bins;
        Ok(match protocol {
            Protocol::Grr => Mechanism::Grr(GrrParams::new(eps, bins)),
            Protocol::Oue => Mechanism::Oue(OueParams::new(eps, bins)),
            Protocol::Olh => {
                let params = match config.olh_range {
                    Some(g) => OlhParams::with_range(eps, bins, g)?,
                    None => OlhParams::new(eps, bins),
                };
                Mechanism::Olh { params, setting }
            }
            Protocol::Hst => Mechanism::Hst { params: HstParams::new(eps, bins), setting },
            Protocol::Sw => {
                if config.sw_bins.len() % bins.len() != 0 {
                    return Err(Error::NotDivisible(config.sw_bins.len(), bins.len()));
                }
                Mechanism::Sw { params: SwParams::new(eps, config.sw_bins), eval_bins: bins, ems: config.ems }
            }
        })
    }

    pub fn protocol(&self) -> Protocol {
        match self {
            Mechanism::Grr(_) => Protocol::Grr,
            Mechanism::Oue(_) => Protocol::Oue,
            Mechanism::Olh { .. } => Protocol::Olh,
            Mechanism::Hst { .. } => Protocol::Hst,
            Mechanism::Sw { .. } => Protocol::Sw,
        }
    }

    /// `None` for protocols without a User/Server distinction.
    pub fn setting(&self) -> Option<Setting> {
        match self {
            Mechanism::Olh { setting, .. } | Mechanism::Hst { setting, .. } => Some(*setting),
            _ => None,
        }
    }

    pub fn epsilon(&self) -> PrivacyBudget {
        match self {
            Mechanism::Grr(p) => p.epsilon(),
            Mechanism::Oue(p) => p.epsilon(),
            Mechanism::Olh { params, .. } => params.epsilon(),
            Mechanism::Hst { params, .. } => params.epsilon(),
            Mechanism::Sw { params, .. } => params.epsilon(),
        }
    }

    /// The `m_o` grid on which estimates are compared.
    pub fn eval_bins(&self) -> BinSpec {
        match self {
            Mechanism::Grr(p) => p.bins(),
            Mechanism::Oue(p) => p.bins(),
            Mechanism::Olh { params, .. } => params.bins(),
            Mechanism::Hst { params, .. } => params.bins(),
            Mechanism::Sw { eval_bins, .. } => *eval_bins,
        }
    }

    /// Grid of [`Mechanism::estimate`]: `m_s` for SW, `m_o` otherwise.
    pub fn estimate_bins(&self) -> BinSpec {
        match self {
            Mechanism::Sw { params, .. } => params.bins(),
            _ => self.eval_bins(),
        }
    }

    pub fn needs_assignment(&self) -> bool {
        self.setting() == Some(Setting::Server)
    }

    /// Draws per-user seeds when the server controls them.
    pub fn draw_assignment<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Option<ServerAssignment> {
        self.needs_assignment().then(|| ServerAssignment::draw(n, rng))
    }

    fn assigned<'a>(&self, assignment: Option<&'a [u64]>, n: usize) -> Result<Option<&'a [u64]>> {
        if !self.needs_assignment() {
            return Ok(None);
        }
        let seeds = assignment.ok_or(Error::MissingAssignment)?;
        if seeds.len() != n {
            return Err(Error::AssignmentLength { got: seeds.len(), need: n });
        }
        Ok(Some(seeds))
    }

    /// Honest reports for 1-indexed CFO bins. Not available for SW.
    pub fn perturb_bins<R: RngCore + ?Sized>(
        &self,
        bins: &[u32],
        assignment: Option<&[u64]>,
        rng: &mut R,
    ) -> Result<Reports> {
        let m = self.eval_bins().len();
        if let Some(&bad) = bins.iter().find(|&&b| b == 0 || b as usize > m) {
            return Err(Error::BinIndex { index: bad as usize, bins: m });
        }
        let assigned = self.assigned(assignment, bins.len())?;
        Ok(match self {
            Mechanism::Grr(p) => Reports::Grr(bins.iter().map(|&x| p.perturb(x as usize, rng)).collect()),
            Mechanism::Oue(p) => {
                let mut rows = BitRows::with_capacity(m, bins.len());
                for &x in bins {
                    p.perturb_into(x as usize, &mut rows, rng);
                }
                Reports::Oue(rows)
            }
            Mechanism::Olh { params, .. } => match assigned {
                Some(seeds) => Reports::Olh {
                    seeds: None,
                    values: bins.iter().zip(seeds).map(|(&x, &s)| params.perturb(x as usize, s, rng)).collect(),
                },
                None => {
                    let mut seeds = Vec::with_capacity(bins.len());
                    let mut values = Vec::with_capacity(bins.len());
                    for &x in bins {
                        let s = rng.next_u64();
                        seeds.push(s);
                        values.push(params.perturb(x as usize, s, rng));
                    }
                    Reports::Olh { seeds: Some(seeds), values }
                }
            },
            Mechanism::Hst { params, .. } => match assigned {
                Some(seeds) => Reports::Hst {
                    vectors: None,
                    positive: bins
                        .iter()
                        .zip(seeds)
                        .map(|(&x, &s)| params.perturb(crate::oracles::vector_sign(s, x as usize), rng))
                        .collect(),
                },
                None => {
                    let mut rows = BitRows::with_capacity(m, bins.len());
                    let mut positive = Vec::with_capacity(bins.len());
                    for &x in bins {
                        let s = rng.next_u64();
                        let row = rows.push_zeroed();
                        for (k, w) in row.iter_mut().enumerate() {
                            *w = crate::oracles::vector_word(s, k);
                        }
                        if m % 64 != 0 {
                            row[m / 64] &= (1u64 << (m % 64)) - 1;
                        }
                        let x = x as usize - 1;
                        let coord = (row[x / 64] >> (x % 64)) & 1 == 1;
                        positive.push(params.perturb(coord, rng));
                    }
                    Reports::Hst { vectors: Some(rows), positive }
                }
            },
            Mechanism::Sw { .. } => return Err(Error::Unsupported("SW perturbs real values, not bins")),
        })
    }

    /// Honest reports for values in [0, 1].
    pub fn perturb_values<R: RngCore + ?Sized>(
        &self,
        values: &[f64],
        assignment: Option<&[u64]>,
        rng: &mut R,
    ) -> Result<Reports> {
        if let Some(&bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::OutOfUnitInterval(bad));
        }
        match self {
            Mechanism::Sw { params, .. } => Ok(Reports::Sw(values.iter().map(|&x| params.perturb(x, rng)).collect())),
            _ => {
                let b = self.eval_bins();
                let bins: Vec<u32> = values.iter().map(|&x| b.bin_of_unchecked(x) as u32).collect();
                self.perturb_bins(&bins, assignment, rng)
            }
        }
    }

    fn check_variant(&self, reports: &Reports) -> Result<()> {
        if reports.protocol() != self.protocol() {
            return Err(Error::ProtocolMismatch(self.protocol().name()));
        }
        let server = self.needs_assignment();
        match reports {
            Reports::Olh { seeds, .. } if seeds.is_some() == server => {
                Err(Error::InvalidReport("OLH reports do not match the setting"))
            }
            Reports::Hst { vectors, .. } if vectors.is_some() == server => {
                Err(Error::InvalidReport("HST reports do not match the setting"))
            }
            _ => Ok(()),
        }
    }

    /// Unbiased estimate before consistency. For SW this is the EMS output on
    /// the `m_s` grid, which is already consistent.
    pub fn aggregate(&self, reports: &Reports, assignment: Option<&[u64]>) -> Result<Histogram> {
        self.check_variant(reports)?;
        if reports.is_empty() {
            return Err(Error::Empty("reports"));
        }
        let assigned = self.assigned(assignment, reports.len())?;
        match (self, reports) {
            (Mechanism::Grr(p), Reports::Grr(v)) => p.aggregate(v),
            (Mechanism::Oue(p), Reports::Oue(rows)) => p.aggregate(rows),
            (Mechanism::Olh { params, .. }, Reports::Olh { seeds, values }) => {
                let seeds = seeds.as_deref().or(assigned).ok_or(Error::MissingAssignment)?;
                params.aggregate(seeds, values)
            }
            (Mechanism::Hst { params, .. }, Reports::Hst { vectors, positive }) => match vectors {
                Some(rows) => params.aggregate_explicit(rows, positive),
                None => params.aggregate_seeded(assigned.ok_or(Error::MissingAssignment)?, positive),
            },
            (Mechanism::Sw { params, ems, .. }, Reports::Sw(v)) => Ok(ems_reconstruct(v, params, ems)?.histogram),
            _ => Err(Error::ProtocolMismatch(self.protocol().name())),
        }
    }

    /// Consistent estimate on [`Mechanism::estimate_bins`]: Norm-Sub for CFOs, EMS for SW.
    pub fn estimate(&self, reports: &Reports, assignment: Option<&[u64]>) -> Result<Histogram> {
        let h = self.aggregate(reports, assignment)?;
        match self {
            Mechanism::Sw { .. } => Ok(h),
            _ => norm_sub(&h),
        }
    }

    /// Consistent estimate on the `m_o` evaluation grid.
    pub fn estimate_eval(&self, reports: &Reports, assignment: Option<&[u64]>) -> Result<Histogram> {
        let h = self.estimate(reports, assignment)?;
        match self {
            Mechanism::Sw { eval_bins, .. } => coarsen(&h, *eval_bins),
            _ => Ok(h),
        }
    }

    /// Largest likelihood ratio of any output between two inputs, from the
    /// protocol constants. Hash and vector based protocols are checked over
    /// the given seeds.
    pub fn max_output_ratio(&self, seeds: &[u64]) -> f64 {
        match self {
            Mechanism::Grr(p) => p.max_output_ratio(),
            Mechanism::Oue(p) => p.max_output_ratio(),
            Mechanism::Olh { params, .. } => params.max_output_ratio(seeds),
            Mechanism::Hst { params, .. } => params.max_output_ratio(seeds),
            Mechanism::Sw { params, .. } => params.max_output_ratio(400),
        }
    }
}

/// Honest collection: every user perturbs their own value.
pub fn collect<R: RngCore + ?Sized>(
    data: &Dataset,
    mechanism: &Mechanism,
    rng: &mut R,
) -> Result<(Reports, Option<ServerAssignment>)> {
    let assignment = mechanism.draw_assignment(data.len(), rng);
    let reports = mechanism.perturb_values(data.values(), assignment.as_ref().map(|a| a.seeds()), rng)?;
    Ok((reports, assignment))
}

/// Draws `t` bin indices from a consistent histogram.
pub(crate) fn sample_bins<R: Rng + ?Sized>(h: &Histogram, t: usize, rng: &mut R) -> Vec<u32> {
    let cdf = h.cdf();
    let total = *cdf.last().expect("nonempty histogram");
    (0..t)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let i = cdf.partition_point(|&c| c <= u);
            (i.min(cdf.len() - 1) + 1) as u32
        })
        .collect()
}
