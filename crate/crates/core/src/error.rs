use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed event log: {0}")]
    MalformedLog(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("{model}: {reason} at x = {x}")]
    Domain {
        model: &'static str,
        x: f64,
        reason: &'static str,
    },

    #[error("{model}: pole at x = {x}")]
    Pole { model: &'static str, x: f64 },

    #[error("parameter vector has {got} values, {model} expects {expected}")]
    ParamCount {
        model: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unknown model token `{0}`")]
    UnknownModel(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("exact expectation needs 2^{n} subsets; n = {n} exceeds the limit of {limit}, use Monte Carlo")]
    Capacity { n: usize, limit: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
