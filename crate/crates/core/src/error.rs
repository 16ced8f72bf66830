use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("extreme-point enumeration requested for dimension {dim}, above the cap of {cap}")]
    EnumerationCap { dim: usize, cap: usize },

    #[error("extreme-point enumeration requires a convex objective over a polytope dual ball")]
    EnumerationUnavailable,

    #[error("objective returned a non-finite value: {0}")]
    NonFinite(f64),

    #[error("degenerate family: every vector is zero")]
    DegenerateFamily,

    #[error("oracle not applicable: {0}")]
    OracleInapplicable(String),

    #[error("kernel contract violated: {0}")]
    KernelContract(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
