use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("adaptive quadrature did not reach tolerance {tolerance:e} within {evaluations} evaluations")]
    Quadrature { tolerance: f64, evaluations: usize },

    #[error("argument {re}{im:+}i lies within {radius:e} of a pole")]
    PoleProximity { re: f64, im: f64, radius: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("starting vector has zero norm")]
    ZeroVector,

    #[error("degenerate spectral box [{a}, {b}] x [-{c}, {c}]")]
    DegenerateBox { a: f64, b: f64, c: f64 },

    #[error("level-curve continuation stalled at theta = {theta}")]
    ContinuationFailure { theta: f64 },

    #[error("matrix exponential overflowed")]
    Overflow,

    #[error("propagation mode requires a Hermitian (Lanczos) decomposition")]
    ModeMismatch,

    #[error("dense path limited to dimension {limit}, got {n}")]
    TooLarge { n: usize, limit: usize },

    #[error("invalid input: {0}")]
    Invalid(&'static str),
}

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
