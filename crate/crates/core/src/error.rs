use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("anneal parameter s = {0} outside [0, 1]")]
    ParameterOutOfRange(f64),

    #[error("no critical point on [0, 1]: {0}")]
    NoCriticalPoint(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integration failed at tau = {tau} ns, k = {k}: {reason}")]
    Integration { tau: f64, k: f64, reason: String },

    #[error("norm drift {drift:e} exceeds limit")]
    NormDrift { drift: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sampler failed in gauge {gauge}: {reason}")]
    Sampler { gauge: usize, reason: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
