//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,

    #[error("sample contains a non-finite value at index {index}: {value}")]
    NonFiniteValue { index: usize, value: f64 },

    #[error("sample too small: need at least {needed} observations, got {got}")]
    SampleTooSmall { needed: usize, got: usize },

    #[error("sample too large: at most {max} observations supported, got {got}")]
    SampleTooLarge { max: usize, got: usize },

    #[error("conditioning set [{alpha}, {beta}] selects no observations")]
    EmptyConditioningSet { alpha: f64, beta: f64 },

    #[error("degenerate variance: {reason}")]
    DegenerateVariance { reason: String },

    #[error("invalid partition: alpha={alpha}, beta={beta} (need 0 <= alpha < beta <= 1)")]
    InvalidPartition { alpha: f64, beta: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("probability out of range: {0} (need 0 < p < 1)")]
    ProbabilityOutOfRange(f64),

    #[error("missing calibration: {0}")]
    MissingCalibration(String),

    #[error("price series contains a non-positive price at index {index}: {value}")]
    NonPositivePrice { index: usize, value: f64 },

    #[error("insufficient data: series `{id}` has {len} observations, need at least {needed}")]
    InsufficientData {
        id: String,
        len: usize,
        needed: usize,
    },

    #[error("calibration file is malformed: {0}")]
    MalformedCalibrationFile(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
