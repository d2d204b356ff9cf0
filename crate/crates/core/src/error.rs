use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value {0} lies outside [0, 1]")]
    OutOfUnitInterval(f64),
    #[error("at least 2 bins are required, got {0}")]
    TooFewBins(usize),
    #[error("bin index {index} outside 1..={bins}")]
    BinIndex { index: usize, bins: usize },
    #[error("privacy budget must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("malicious fraction must lie in [0, 1], got {0}")]
    InvalidBeta(f64),
    #[error("hash range must be at least 2, got {0}")]
    InvalidHashRange(usize),
    #[error("histogram grids differ: {0} vs {1} bins")]
    GridMismatch(usize, usize),
    #[error("{0} fine bins cannot be coarsened into {1} bins")]
    NotDivisible(usize, usize),
    #[error("input is empty: {0}")]
    Empty(&'static str),
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("constant input cannot be normalized")]
    ConstantInput,
    #[error("histogram is not a probability distribution: {0}")]
    NotConsistent(&'static str),
    #[error("reports mix protocol variants")]
    MixedReports,
    #[error("reports do not belong to protocol {0}")]
    ProtocolMismatch(&'static str),
    #[error("invalid report: {0}")]
    InvalidReport(&'static str),
    #[error("server setting requires a user assignment")]
    MissingAssignment,
    #[error("assignment covers {got} users, {need} required")]
    AssignmentLength { got: usize, need: usize },
    #[error("attack is incompatible with the mechanism: {0}")]
    IncompatibleAttack(&'static str),
    #[error("operation not supported for {0}")]
    Unsupported(&'static str),
    #[error("argument outside the function domain: {0}")]
    Domain(&'static str),
}
