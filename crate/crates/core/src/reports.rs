//! Report transcripts.
//!
//! [`Reports`] stores a whole collection column-wise for fast aggregation;
//! [`Report`] is the per-user, protocol-tagged form used for serialization.

use alloc::vec::Vec;


use crate::oracles::BitRows;
use crate::{Error, Mechanism, Protocol, Result};

/// Reports of many users under one protocol.
#[derive(Debug, Clone, PartialEq)]
pub enum Reports {
    /// Reported indices in `1..=m`.
    Grr(Vec<u32>),
    /// One bit row per user.
    Oue(BitRows),
    /// Hash values in `1..=g`; seeds are present only when users pick them.
    Olh { seeds: Option<Vec<u64>>, values: Vec<u32> },
    /// Report signs (`true` for `+c`); explicit vectors only when users pick them.
    Hst { vectors: Option<BitRows>, positive: Vec<bool> },
    /// Real values in `[-b, 1+b]`.
    Sw(Vec<f64>),
}

impl Reports {
    pub fn protocol(&self) -> Protocol {
        match self {
            Reports::Grr(_) => Protocol::Grr,
            Reports::Oue(_) => Protocol::Oue,
            Reports::Olh { .. } => Protocol::Olh,
            Reports::Hst { .. } => Protocol::Hst,
            Reports::Sw(_) => Protocol::Sw,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Reports::Grr(v) => v.len(),
            Reports::Oue(rows) => rows.len(),
            Reports::Olh { values, .. } => values.len(),
            Reports::Hst { positive, .. } => positive.len(),
            Reports::Sw(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends `other`; both must have the same variant and setting shape.
    pub fn append(&mut self, other: Reports) -> Result<()> {
        match (self, other) {
            (Reports::Grr(a), Reports::Grr(b)) => a.extend(b),
            (Reports::Oue(a), Reports::Oue(b)) if a.width() == b.width() => a.extend(&b),
            (Reports::Olh { seeds: sa, values: va }, Reports::Olh { seeds: sb, values: vb })
                if sa.is_some() == sb.is_some() =>
            {
                if let (Some(sa), Some(sb)) = (sa.as_mut(), sb) {
                    sa.extend(sb);
                }
                va.extend(vb);
            }
            (Reports::Hst { vectors: ra, positive: pa }, Reports::Hst { vectors: rb, positive: pb })
                if ra.is_some() == rb.is_some() =>
            {
                if let (Some(ra), Some(rb)) = (ra.as_mut(), rb) {
                    if ra.width() != rb.width() {
                        return Err(Error::MixedReports);
                    }
                    ra.extend(&rb);
                }
                pa.extend(pb);
            }
            (Reports::Sw(a), Reports::Sw(b)) => a.extend(b),
            _ => return Err(Error::MixedReports),
        }
        Ok(())
    }

    /// Per-user records.
    pub fn to_records(&self, mechanism: &Mechanism) -> Vec<Report> {
        let c = match mechanism {
            Mechanism::Hst { params, .. } => params.c(),
            _ => 1.0,
        };
        match self {
            Reports::Grr(v) => v.iter().map(|&index| Report::Grr { index }).collect(),
            Reports::Oue(rows) => (0..rows.len())
                .map(|j| Report::Oue { bits: rows.row_bools(j).into_iter().map(u8::from).collect() })
                .collect(),
            Reports::Olh { seeds, values } => values
                .iter()
                .enumerate()
                .map(|(j, &value)| Report::Olh { seed: seeds.as_ref().map(|s| s[j]), value })
                .collect(),
            Reports::Hst { vectors, positive } => positive
                .iter()
                .enumerate()
                .map(|(j, &p)| Report::Hst {
                    vector: vectors
                        .as_ref()
                        .map(|rows| rows.row_bools(j).into_iter().map(|b| if b { 1 } else { -1 }).collect()),
                    signed: if p { c } else { -c },
                })
                .collect(),
            Reports::Sw(v) => v.iter().map(|&value| Report::Sw { value }).collect(),
        }
    }

    /// Rebuilds a transcript, validating every record against `mechanism`.
    pub fn from_records(records: &[Report], mechanism: &Mechanism) -> Result<Reports> {
        let protocol = mechanism.protocol();
        if records.iter().any(|r| r.protocol() != protocol) {
            return Err(if records.iter().any(|r| r.protocol() != records[0].protocol()) {
                Error::MixedReports
            } else {
                Error::ProtocolMismatch(protocol.name())
            });
        }
        let m = mechanism.eval_bins().len();
        let server = mechanism.needs_assignment();
        Ok(match mechanism {
            Mechanism::Grr(_) => Reports::Grr(
                records
                    .iter()
                    .map(|r| match r {
                        Report::Grr { index } if (1..=m as u32).contains(index) => Ok(*index),
                        _ => Err(Error::InvalidReport("GRR index outside 1..=m")),
                    })
                    .collect::<Result<_>>()?,
            ),
            Mechanism::Oue(_) => {
                let mut rows = BitRows::with_capacity(m, records.len());
                for r in records {
                    match r {
                        Report::Oue { bits } if bits.len() == m && bits.iter().all(|&b| b <= 1) => {
                            let bools: Vec<bool> = bits.iter().map(|&b| b == 1).collect();
                            rows.push_bools(&bools);
                        }
                        _ => return Err(Error::InvalidReport("OUE vector must have m entries of 0 or 1")),
                    }
                }
                Reports::Oue(rows)
            }
            Mechanism::Olh { params, .. } => {
                let mut seeds = Vec::new();
                let mut values = Vec::with_capacity(records.len());
                for r in records {
                    match r {
                        Report::Olh { seed, value } if (1..=params.g() as u32).contains(value) => {
                            match (seed, server) {
                                (Some(s), false) => seeds.push(*s),
                                (None, true) => {}
                                _ => return Err(Error::InvalidReport("OLH seed presence does not match the setting")),
                            }
                            values.push(*value);
                        }
                        _ => return Err(Error::InvalidReport("OLH value outside 1..=g")),
                    }
                }
                Reports::Olh { seeds: (!server).then_some(seeds), values }
            }
            Mechanism::Hst { params, .. } => {
                let c = params.c();
                let mut rows = BitRows::with_capacity(m, records.len());
                let mut positive = Vec::with_capacity(records.len());
                for r in records {
                    let Report::Hst { vector, signed } = r else { unreachable!("protocol checked") };
                    let tol = 1e-9 * c;
                    let sign = if (signed - c).abs() <= tol {
                        true
                    } else if (signed + c).abs() <= tol {
                        false
                    } else {
                        return Err(Error::InvalidReport("HST signed value must be +c or -c"));
                    };
                    match (vector, server) {
                        (Some(v), false) if v.len() == m && v.iter().all(|&s| s == 1 || s == -1) => {
                            let bools: Vec<bool> = v.iter().map(|&s| s == 1).collect();
                            rows.push_bools(&bools);
                        }
                        (None, true) => {}
                        _ => return Err(Error::InvalidReport("HST vector does not match the setting or length")),
                    }
                    positive.push(sign);
                }
                Reports::Hst { vectors: (!server).then_some(rows), positive }
            }
            Mechanism::Sw { params, .. } => Reports::Sw(
                records
                    .iter()
                    .map(|r| match r {
                        Report::Sw { value } if params.in_output_domain(*value) => Ok(*value),
                        _ => Err(Error::InvalidReport("SW report outside [-b, 1+b]")),
                    })
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

/// One user's report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "protocol", rename_all = "lowercase"))]
pub enum Report {
    Grr {
        index: u32,
    },
    Oue {
        bits: Vec<u8>,
    },
    Olh {
        #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
        seed: Option<u64>,
        value: u32,
    },
    Hst {
        #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
        vector: Option<Vec<i8>>,
        signed: f64,
    },
    Sw {
        value: f64,
    },
}

impl Report {
    pub fn protocol(&self) -> Protocol {
        match self {
            Report::Grr { .. } => Protocol::Grr,
            Report::Oue { .. } => Protocol::Oue,
            Report::Olh { .. } => Protocol::Olh,
            Report::Hst { .. } => Protocol::Hst,
            Report::Sw { .. } => Protocol::Sw,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{MechanismConfig, RngStream, Setting};
    use alloc::vec;
    use rand::Rng;

    fn mech(p: Protocol, s: Setting) -> Mechanism {
        let cfg = MechanismConfig { bins: crate::BinSpec::new(8).unwrap(), ..MechanismConfig::default() };
        Mechanism::new(p, s, 1.0, &cfg).unwrap()
    }

    #[test]
    fn records_round_trip() {
        let mut rng = RngStream::new(1);
        let values: Vec<f64> = (0..50).map(|_| rng.random()).collect();
        for p in Protocol::ALL {
            for s in [Setting::User, Setting::Server] {
                let m = mech(p, s);
                let a = m.draw_assignment(values.len(), &mut rng);
                let r = m.perturb_values(&values, a.as_ref().map(|a| a.seeds()), &mut rng).unwrap();
                let back = Reports::from_records(&r.to_records(&m), &m).unwrap();
                assert_eq!(back, r, "{p} {s}");
            }
        }
    }

    #[test]
    fn rejects_bad_records() {
        let grr = mech(Protocol::Grr, Setting::User);
        assert!(Reports::from_records(&[Report::Grr { index: 9 }], &grr).is_err());
        assert_eq!(
            Reports::from_records(&[Report::Grr { index: 1 }, Report::Sw { value: 0.1 }], &grr),
            Err(Error::MixedReports)
        );
        assert!(Reports::from_records(&[Report::Sw { value: 0.1 }], &grr).is_err());
        let hst = mech(Protocol::Hst, Setting::Server);
        assert!(Reports::from_records(&[Report::Hst { vector: None, signed: 0.5 }], &hst).is_err());
        let olh = mech(Protocol::Olh, Setting::Server);
        assert!(Reports::from_records(&[Report::Olh { seed: None, value: 9 }], &olh).is_err());
        assert!(Reports::from_records(&[Report::Olh { seed: Some(1), value: 1 }], &olh).is_err());
        let oue = mech(Protocol::Oue, Setting::User);
        assert!(Reports::from_records(&[Report::Oue { bits: vec![1, 0] }], &oue).is_err());
    }

    #[test]
    fn append_checks_variant() {
        let mut a = Reports::Grr(vec![1]);
        assert!(a.append(Reports::Sw(vec![0.5])).is_err());
        a.append(Reports::Grr(vec![2])).unwrap();
        assert_eq!(a.len(), 2);
        let mut o = Reports::Olh { seeds: Some(vec![1]), values: vec![1] };
        assert!(o.append(Reports::Olh { seeds: None, values: vec![1] }).is_err());
    }
}
