//! Baseline and crafted-report poisoning attacks. Fake users always target
//! the right-most bin `m_o` (or the top of the SW output domain).

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::index;
use rand::{Rng, RngCore};

use crate::oracles::{BitRows, GrrParams, HstParams, OlhParams, OueParams};
use crate::sw::SwParams;
use crate::{Error, Mechanism, Protocol, Reports, Result, Setting};

/// Where SW fake values are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SwRange {
    /// The last output cell.
    RightmostBin,
    /// `[1 + 2b/3, 1 + b]`.
    HighThird,
    /// `[1, 1 + b]`.
    AboveOne,
    /// `[1 - b, 1 + b]`.
    FullHigh,
}

impl SwRange {
    pub const ALL: [SwRange; 4] = [SwRange::RightmostBin, SwRange::HighThird, SwRange::AboveOne, SwRange::FullHigh];

    pub fn name(self) -> &'static str {
        match self {
            SwRange::RightmostBin => "rightmost-bin",
            SwRange::HighThird => "high-third",
            SwRange::AboveOne => "above-one",
            SwRange::FullHigh => "full-high",
        }
    }

    /// Interval the fake values are drawn from.
    pub fn bounds(self, params: &SwParams) -> (f64, f64) {
        let b = params.b();
        let top = 1.0 + b;
        match self {
            // One cell width at the top of the output domain; the grid's own
            // last cell can be a sliver that no bin center reaches.
            SwRange::RightmostBin => (top - params.cell_width(), top),
            SwRange::HighThird => (1.0 + 2.0 * b / 3.0, top),
            SwRange::AboveOne => (1.0, top),
            SwRange::FullHigh => (1.0 - b, top),
        }
    }
}

impl FromStr for SwRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SwRange::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or(Error::Unsupported("unknown SW range"))
    }
}

/// Attack strategy of the fake users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(into = "String", try_from = "String"))]
pub enum Attack {
    /// Honestly perturb the maximum input.
    Baseline,
    /// The protocol's crafted-report attack (GRR, OUE, OLH, HST).
    Crafted,
    /// OUE reports padded with random one-bits to look honest.
    OuePad,
    /// SW fake values drawn uniformly from a range.
    Sw(SwRange),
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attack::Baseline => f.write_str("baseline"),
            Attack::Crafted => f.write_str("crafted"),
            Attack::OuePad => f.write_str("oue-pad"),
            Attack::Sw(r) => write!(f, "sw-{}", r.name()),
        }
    }
}

impl From<Attack> for String {
    fn from(a: Attack) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Attack {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for Attack {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "baseline" => Ok(Attack::Baseline),
            "crafted" => Ok(Attack::Crafted),
            "oue-pad" => Ok(Attack::OuePad),
            other => other.strip_prefix("sw-").unwrap_or(other).parse().map(Attack::Sw),
        }
    }
}

pub const DEFAULT_OLH_POOL: usize = 1000;

/// Attack strategy plus the malicious fraction β.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttackSpec {
    pub attack: Attack,
    pub beta: f64,
    /// Seeds sampled per fake user by the OLH-User attack.
    pub olh_pool: usize,
}

impl AttackSpec {
    pub fn new(attack: Attack, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidBeta(beta));
        }
        Ok(Self { attack, beta, olh_pool: DEFAULT_OLH_POOL })
    }

    /// `n_f = round(β n)`.
    pub fn fake_count(&self, n: usize) -> usize {
        ((self.beta * n as f64).round() as usize).min(n)
    }

    /// Rejects strategies that do not apply to the mechanism.
    pub fn check(&self, mechanism: &Mechanism) -> Result<()> {
        match (self.attack, mechanism.protocol()) {
            (Attack::Baseline, _) => Ok(()),
            (Attack::Crafted, Protocol::Sw) => Err(Error::IncompatibleAttack("SW attacks need a range")),
            (Attack::Crafted, _) => Ok(()),
            (Attack::OuePad, Protocol::Oue) => Ok(()),
            (Attack::OuePad, _) => Err(Error::IncompatibleAttack("padding applies to OUE only")),
            (Attack::Sw(_), Protocol::Sw) => Ok(()),
            (Attack::Sw(_), _) => Err(Error::IncompatibleAttack("range attacks apply to SW only")),
        }?;
        if self.olh_pool == 0 {
            return Err(Error::IncompatibleAttack("OLH pool must be nonempty"));
        }
        Ok(())
    }
}

/// Honest perturbation of the maximum input by `n_f` users.
pub fn baseline_attack<R: RngCore + ?Sized>(
    mechanism: &Mechanism,
    n_f: usize,
    assignment: Option<&[u64]>,
    rng: &mut R,
) -> Result<Reports> {
    mechanism.perturb_values(&vec![1.0; n_f], assignment, rng)
}

pub fn attack_grr(params: &GrrParams, n_f: usize) -> Reports {
    Reports::Grr(vec![params.bins().len() as u32; n_f])
}

pub fn attack_oue(params: &OueParams, n_f: usize) -> Reports {
    let m = params.bins().len();
    let mut rows = BitRows::with_capacity(m, n_f);
    for _ in 0..n_f {
        rows.push_positions(&[m]);
    }
    Reports::Oue(rows)
}

/// Extra one-bits `l = ⌊(m-1)/(e^ε+1) - 1/2⌋`, or `None` when negative.
pub fn oue_pad_length(params: &OueParams) -> Option<usize> {
    let m = params.bins().len() as f64;
    let l = ((m - 1.0) / (params.epsilon().exp() + 1.0) - 0.5).floor();
    (l >= 0.0).then_some(l as usize)
}

/// Sets bit `m` plus `l` distinct random other bits.
pub fn attack_oue_pad<R: Rng + ?Sized>(params: &OueParams, n_f: usize, rng: &mut R) -> Reports {
    let Some(l) = oue_pad_length(params) else {
        return attack_oue(params, n_f);
    };
    let m = params.bins().len();
    let l = l.min(m - 1);
    let mut rows = BitRows::with_capacity(m, n_f);
    let mut positions = Vec::with_capacity(l + 1);
    for _ in 0..n_f {
        positions.clear();
        positions.push(m);
        positions.extend(index::sample(rng, m - 1, l).into_iter().map(|i| i + 1));
        rows.push_positions(&positions);
    }
    Reports::Oue(rows)
}

/// Explicit vector `[-1, …, -1, +1]` with report `+c`.
pub fn attack_hst_user(params: &HstParams, n_f: usize) -> Reports {
    let m = params.bins().len();
    let mut rows = BitRows::with_capacity(m, n_f);
    for _ in 0..n_f {
        rows.push_positions(&[m]);
    }
    Reports::Hst { vectors: Some(rows), positive: vec![true; n_f] }
}

/// Report `c · s_j[m]` under each assigned vector.
pub fn attack_hst_server(params: &HstParams, assignment: &[u64]) -> Reports {
    let m = params.bins().len();
    Reports::Hst {
        vectors: None,
        positive: assignment.iter().map(|&s| crate::oracles::vector_sign(s, m)).collect(),
    }
}

/// Best seed from a pool: the preimage of `H(m)` with the largest mean,
/// lowest seed on ties. Returns `(seed, H(m), preimage mean)`.
pub(crate) fn best_olh_seed<R: RngCore + ?Sized>(params: &OlhParams, pool: usize, rng: &mut R) -> (u64, u32, f64) {
    let m = params.bins().len();
    let mut best = (u64::MAX, 0u32, f64::NEG_INFINITY);
    for _ in 0..pool {
        let s = rng.next_u64();
        let y = params.hash(s, m);
        let (mut sum, mut count) = (0usize, 0usize);
        for i in 1..=m {
            if params.hash(s, i) == y {
                sum += i;
                count += 1;
            }
        }
        let mean = sum as f64 / count as f64;
        if mean > best.2 || (mean == best.2 && s < best.0) {
            best = (s, y, mean);
        }
    }
    best
}

pub fn attack_olh_user<R: RngCore + ?Sized>(params: &OlhParams, n_f: usize, pool: usize, rng: &mut R) -> Reports {
    let mut seeds = Vec::with_capacity(n_f);
    let mut values = Vec::with_capacity(n_f);
    for _ in 0..n_f {
        let (s, y, _) = best_olh_seed(params, pool.max(1), rng);
        seeds.push(s);
        values.push(y);
    }
    Reports::Olh { seeds: Some(seeds), values }
}

/// `ŷ_j = H_j(m)` under each assigned seed.
pub fn attack_olh_server(params: &OlhParams, assignment: &[u64]) -> Reports {
    let m = params.bins().len();
    Reports::Olh { seeds: None, values: assignment.iter().map(|&s| params.hash(s, m)).collect() }
}

pub fn attack_sw<R: Rng + ?Sized>(params: &SwParams, range: SwRange, n_f: usize, rng: &mut R) -> Reports {
    let (lo, hi) = range.bounds(params);
    Reports::Sw((0..n_f).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect())
}

/// Fake reports for `n_f` users. `assignment` holds the fake users' assigned
/// seeds in the Server setting.
pub fn craft<R: RngCore + ?Sized>(
    mechanism: &Mechanism,
    spec: &AttackSpec,
    n_f: usize,
    assignment: Option<&[u64]>,
    rng: &mut R,
) -> Result<Reports> {
    spec.check(mechanism)?;
    if mechanism.needs_assignment() {
        let got = assignment.ok_or(Error::MissingAssignment)?.len();
        if got != n_f {
            return Err(Error::AssignmentLength { got, need: n_f });
        }
    }
    Ok(match (spec.attack, mechanism) {
        (Attack::Baseline, _) => return baseline_attack(mechanism, n_f, assignment, rng),
        (Attack::Crafted, Mechanism::Grr(p)) => attack_grr(p, n_f),
        (Attack::Crafted, Mechanism::Oue(p)) => attack_oue(p, n_f),
        (Attack::OuePad, Mechanism::Oue(p)) => attack_oue_pad(p, n_f, rng),
        (Attack::Crafted, Mechanism::Olh { params, setting: Setting::User }) => {
            attack_olh_user(params, n_f, spec.olh_pool, rng)
        }
        (Attack::Crafted, Mechanism::Olh { params, setting: Setting::Server }) => {
            attack_olh_server(params, assignment.ok_or(Error::MissingAssignment)?)
        }
        (Attack::Crafted, Mechanism::Hst { params, setting: Setting::User }) => attack_hst_user(params, n_f),
        (Attack::Crafted, Mechanism::Hst { params, setting: Setting::Server }) => {
            attack_hst_server(params, assignment.ok_or(Error::MissingAssignment)?)
        }
        (Attack::Sw(range), Mechanism::Sw { params, .. }) => attack_sw(params, range, n_f, rng),
        _ => return Err(Error::IncompatibleAttack("strategy does not match the protocol")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::metrics::baseline_skew;
    use crate::oracles::hash_map;
    use crate::{BinSpec, Dataset, Histogram, MechanismConfig, PrivacyBudget, RngStream};

    fn eps(e: f64) -> PrivacyBudget {
        PrivacyBudget::new(e).unwrap()
    }

    fn b32() -> BinSpec {
        BinSpec::new(32).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(AttackSpec::new(Attack::Crafted, 1.5).is_err());
        let s = AttackSpec::new(Attack::Crafted, 0.05).unwrap();
        assert_eq!(s.fake_count(100_000), 5000);
        assert_eq!(AttackSpec::new(Attack::Crafted, 0.025).unwrap().fake_count(10), 0);
        let cfg = MechanismConfig::default();
        let sw = Mechanism::new(Protocol::Sw, Setting::User, 1.0, &cfg).unwrap();
        let grr = Mechanism::new(Protocol::Grr, Setting::User, 1.0, &cfg).unwrap();
        assert!(s.check(&sw).is_err());
        assert!(AttackSpec::new(Attack::OuePad, 0.1).unwrap().check(&grr).is_err());
        assert!(AttackSpec::new(Attack::Sw(SwRange::AboveOne), 0.1).unwrap().check(&grr).is_err());
        assert!(AttackSpec::new(Attack::Sw(SwRange::AboveOne), 0.1).unwrap().check(&sw).is_ok());
    }

    #[test]
    fn names_round_trip() {
        for a in [Attack::Baseline, Attack::Crafted, Attack::OuePad, Attack::Sw(SwRange::HighThird)] {
            assert_eq!(a.to_string().parse::<Attack>().unwrap(), a);
        }
        assert_eq!("above-one".parse::<Attack>().unwrap(), Attack::Sw(SwRange::AboveOne));
        assert!("nope".parse::<Attack>().is_err());
    }

    #[test]
    fn grr_and_oue_reports() {
        let g = GrrParams::new(eps(1.0), b32());
        assert_eq!(attack_grr(&g, 3), Reports::Grr(vec![32; 3]));
        assert_eq!(attack_grr(&g, 0).len(), 0);
        let o = OueParams::new(eps(1.0), b32());
        let Reports::Oue(rows) = attack_oue(&o, 10) else { panic!() };
        let c = rows.column_counts();
        assert_eq!(c[31], 10);
        assert!(c[..31].iter().all(|&v| v == 0));
    }

    #[test]
    fn oue_pad() {
        let o = OueParams::new(eps(0.2), b32());
        assert_eq!(oue_pad_length(&o), Some(13));
        let Reports::Oue(rows) = attack_oue_pad(&o, 200, &mut RngStream::new(1)) else { panic!() };
        for j in 0..rows.len() {
            assert!(rows.get(j, 32));
            assert_eq!(rows.row_ones(j), 14);
        }
        // Large ε: l < 0 falls back to the plain attack.
        let o = OueParams::new(eps(5.0), BinSpec::new(4).unwrap());
        assert_eq!(oue_pad_length(&o), None);
        assert_eq!(attack_oue_pad(&o, 5, &mut RngStream::new(1)), attack_oue(&o, 5));
    }

    #[test]
    fn hst_reports() {
        let h = HstParams::new(eps(1.0), b32());
        let Reports::Hst { vectors: Some(rows), positive } = attack_hst_user(&h, 4) else { panic!() };
        assert!(positive.iter().all(|&p| p));
        let est = h.aggregate_explicit(&rows, &positive).unwrap();
        assert!((est.get(32) - h.c()).abs() < 1e-12);
        assert!((1..32).all(|i| (est.get(i) + h.c()).abs() < 1e-12));

        let seeds: Vec<u64> = (0..2000).collect();
        let Reports::Hst { vectors: None, positive } = attack_hst_server(&h, &seeds) else { panic!() };
        let est = h.aggregate_seeded(&seeds, &positive).unwrap();
        assert!((est.get(32) - h.c()).abs() < 1e-12);
        assert!((1..32).all(|i| est.get(i).abs() < 0.15 * h.c()));
    }

    #[test]
    fn olh_user_selection() {
        let o = OlhParams::with_range(eps(1.0), b32(), 3).unwrap();
        let mut rng = RngStream::new(5);
        let Reports::Olh { seeds: Some(seeds), values } = attack_olh_user(&o, 100, 1000, &mut rng) else {
            panic!()
        };
        let mean_preimage = |s: u64, y: u32| {
            let pre: Vec<usize> = (1..=32).filter(|&i| o.hash(s, i) == y).collect();
            pre.iter().sum::<usize>() as f64 / pre.len() as f64
        };
        let mut chosen = 0.0;
        for (&s, &y) in seeds.iter().zip(&values) {
            assert_eq!(hash_map(s, 32, 3).unwrap() as u32, y);
            chosen += mean_preimage(s, y);
        }
        let mut random = 0.0;
        for s in 0..100u64 {
            random += mean_preimage(s, o.hash(s, 32));
        }
        assert!(chosen > random + 100.0 * 3.0, "chosen {chosen} random {random}");
    }

    #[test]
    fn olh_pool_tie_breaks_on_lowest_seed() {
        let o = OlhParams::with_range(eps(1.0), BinSpec::new(2).unwrap(), 64).unwrap();
        // With 2 bins and 64 buckets many seeds reach the ideal mean 2.
        let mut a = RngStream::new(8);
        let (s, _, mean) = best_olh_seed(&o, 50, &mut a);
        let mut b = RngStream::new(8);
        let ideal: Vec<u64> =
            (0..50).map(|_| b.next_u64()).filter(|&t| o.hash(t, 1) != o.hash(t, 2)).collect();
        assert_eq!(mean, 2.0);
        assert_eq!(s, *ideal.iter().min().unwrap());
    }

    #[test]
    fn olh_server_reports_support_target() {
        let o = OlhParams::with_range(eps(1.0), b32(), 4).unwrap();
        let seeds: Vec<u64> = (100..3100).collect();
        let Reports::Olh { values, .. } = attack_olh_server(&o, &seeds) else { panic!() };
        let c = o.support_counts(&seeds, &values).unwrap();
        assert_eq!(c[31], 3000);
        let others = c[..31].iter().sum::<u64>() as f64 / 3000.0;
        assert!((others - 31.0 / 4.0).abs() < 0.5, "{others}");
    }

    #[test]
    fn sw_ranges() {
        let s = SwParams::with_default_bins(eps(0.6));
        let mut rng = RngStream::new(2);
        for r in SwRange::ALL {
            let Reports::Sw(v) = attack_sw(&s, r, 500, &mut rng) else { panic!() };
            let (lo, hi) = r.bounds(&s);
            assert!(v.iter().all(|&x| s.in_output_domain(x) && x >= lo && x <= hi));
            if r == SwRange::RightmostBin {
                assert!((hi - lo - 1.0 / 512.0).abs() < 1e-12 && hi == 1.0 + s.b());
                let last = s.output_cells() - 1;
                assert!(v.iter().all(|&x| s.cell_of(x).unwrap() + 1 >= last));
            }
        }
    }

    #[test]
    fn baseline_matches_skew() {
        let cfg = MechanismConfig::default();
        let mech = Mechanism::new(Protocol::Grr, Setting::User, 1.0, &cfg).unwrap();
        let mut rng = RngStream::new(3);
        let n = 200_000;
        let n_f = 10_000;
        let data = Dataset::new((0..n - n_f).map(|j| (j as f64 + 0.5) / (n - n_f) as f64).collect()).unwrap();
        let truth = Histogram::uniform(b32());
        let mut reports = mech.perturb_values(data.values(), None, &mut rng).unwrap();
        reports.append(baseline_attack(&mech, n_f, None, &mut rng).unwrap()).unwrap();
        let est = mech.aggregate(&reports, None).unwrap();
        let skew = baseline_skew(&truth, 0.05).unwrap();
        let g = GrrParams::new(PrivacyBudget::new(1.0).unwrap(), b32());
        let sd = (g.q() * (1.0 - g.q()) / (n as f64 * (g.p() - g.q()).powi(2))).sqrt();
        for (a, b) in est.freqs().iter().zip(skew.freqs()) {
            assert!((a - b).abs() < 5.0 * sd);
        }
        let huge = Mechanism::new(Protocol::Grr, Setting::User, 60.0, &cfg).unwrap();
        assert_eq!(baseline_attack(&huge, 5, None, &mut rng).unwrap(), Reports::Grr(vec![32; 5]));
        assert!(baseline_attack(&mech, 0, None, &mut rng).unwrap().is_empty());
    }
}
