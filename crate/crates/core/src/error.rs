use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("port count mismatch: {left} vs {right}")]
    PortMismatch { left: usize, right: usize },

    #[error("port index {index} out of range for a {ports}-port network")]
    PortOutOfRange { index: usize, ports: usize },

    #[error("algebraic loop: |1 - S[{out_port},{in_port}]| = {gap:e} is below tolerance")]
    AlgebraicLoop { out_port: usize, in_port: usize, gap: f64 },

    #[error("network has modes {found:?}, expected {expected:?}")]
    ModeMismatch { expected: Vec<String>, found: Vec<String> },

    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("phase never reaches the next tick level (omega = {omega}, sigma = {sigma})")]
    NeverCrosses { omega: f64, sigma: f64 },

    #[error("distribution is degenerate: {0}")]
    Degenerate(String),

    #[error("not enough data: need {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("records disagree: {0}")]
    RecordMismatch(String),

    #[error("fit did not converge after {iterations} iterations (last cost {cost:e}): {reason}")]
    FitFailure { iterations: usize, cost: f64, reason: String },

    #[error("no root in the physical bracket: {0}")]
    NoRoot(String),

    #[error("malformed IQ data: {0}")]
    Format(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
