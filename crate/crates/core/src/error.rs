use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field contains non-finite samples")]
    InvalidField,

    #[error("coefficients are not Hermitian-symmetric (defect {defect:e})")]
    NotRealField { defect: f64 },

    #[error("grid mismatch: {left} vs {right} points per axis")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid shell index {0} (must be >= -1)")]
    InvalidShell(i32),

    #[error("dyadic block {0} is identically zero")]
    ZeroBlock(i32),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("alpha + beta = {sum} <= 2: no admissible theta")]
    ThresholdViolated { sum: f64 },

    #[error("non-finite state detected at t = {time}")]
    BlowupDetected { time: f64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid band: {0}")]
    InvalidBand(String),
}

pub type Result<T> = std::result::Result<T, Error>;
