use thiserror::Error;

/// Broad classification used by front ends to map failures onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// The inputs were rejected before any numerical work happened.
    Validation,
    /// A numerical procedure failed or a stability bound was violated.
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("fields are defined on different grids")]
    GridMismatch,

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("eigensolver did not converge for state {index}")]
    NonConvergence { index: usize },

    #[error("singular linear system (pivot {pivot} vanished)")]
    SingularSystem { pivot: usize },

    #[error("degenerate calibration: {0}")]
    DegenerateCalibration(String),

    #[error("elliptic regime: {0}")]
    EllipticRegime(String),

    #[error("CFL violation: dt = {dt:e} exceeds stable limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("insufficient time samples: need at least 3, got {0}")]
    InsufficientSamples(usize),

    #[error("operator form requires uniform electromagnetic potentials")]
    NonUniformPotential,

    #[error("superluminal velocity: |u| = {speed} >= c = {c}")]
    Superluminal { speed: f64, c: f64 },

    #[error("time grids do not match: {0}")]
    TimeMismatch(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NonConvergence { .. }
            | Error::SingularSystem { .. }
            | Error::CflViolation { .. }
            | Error::EllipticRegime(_)
            | Error::NonFinite { .. } => ErrorClass::Numerical,
            _ => ErrorClass::Validation,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
