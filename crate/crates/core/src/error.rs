use thiserror::Error;

/// Errors produced by the invlab library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {0}: need at least 2 levels")]
    InvalidDimension(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("channel has no Kraus elements")]
    EmptyChannel,
    #[error("channel is not trace preserving (max deviation {0:e})")]
    NotCptp(f64),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("denominator underflow in {label}: |<O>| = {magnitude:e}")]
    DenominatorUnderflow { label: String, magnitude: f64 },
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("invariant value is zero; sign cannot be decoded")]
    ZeroInvariant,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("degenerate state: {0}")]
    DegenerateState(String),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
