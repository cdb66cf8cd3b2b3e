//! Error type shared across the crate.

use thiserror::Error;

/// Coarse classification used by callers that map failures to process exit
/// codes: configuration mistakes, bad input data, numerical breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("column {name:?} not found in header of {path}")]
    MissingColumn { name: String, path: String },

    #[error("row {row}: {message}")]
    BadRecord { row: usize, message: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset has no observed events; the likelihood has no interior maximum")]
    AllCensored,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter {name}: {value} (must be positive and finite)")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("step size underflow at t = {t}; the system may be too stiff for the chosen method")]
    StepUnderflow { t: f64 },

    #[error("non-finite state or derivative encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("exceeded the maximum of {max_steps} steps at t = {t}")]
    MaxSteps { max_steps: usize, t: f64 },

    #[error("system provides no analytic Jacobian")]
    NoJacobian,

    #[error("degenerate interaction: 1 - (alpha*kappa)^2/(lambda*beta) = {d:e} is numerically zero")]
    DegenerateSteadyState { d: f64 },

    #[error("cumulative hazard column is not strictly increasing at index {index}")]
    NonMonotoneCumHaz { index: usize },

    #[error("inversion target {target} exceeds the grid range [{lo}, {hi}]")]
    TargetBeyondGrid { target: f64, lo: f64, hi: f64 },

    #[error("target censoring rate {rate} is not reachable: survival at horizon {horizon} is {survival}")]
    UnreachableCensoringRate {
        rate: f64,
        horizon: f64,
        survival: f64,
    },

    #[error("non-finite log-posterior at the initial point")]
    NonFiniteInit,

    #[error("degenerate chain: {0}")]
    DegenerateChain(String),

    #[error("{failed} of {total} posterior draws failed to integrate (more than {permitted} permitted)")]
    TooManyFailedDraws {
        failed: usize,
        total: usize,
        permitted: usize,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            Io { .. } | Csv { .. } | MissingColumn { .. } | BadRecord { .. } | EmptyDataset
            | AllCensored => ErrorKind::Data,
            InvalidConfig(_) | InvalidParameter { .. } | NoJacobian => ErrorKind::Config,
            StepUnderflow { .. }
            | NonFinite { .. }
            | MaxSteps { .. }
            | DegenerateSteadyState { .. }
            | NonMonotoneCumHaz { .. }
            | TargetBeyondGrid { .. }
            | UnreachableCensoringRate { .. }
            | NonFiniteInit
            | DegenerateChain(_)
            | TooManyFailedDraws { .. } => ErrorKind::Numeric,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
