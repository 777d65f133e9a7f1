use thiserror::Error;

/// Errors produced by state constructors, protocol planners, and oracles.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("wrong class: {0}")]
    WrongClass(String),

    #[error("unsupported classification: {0}")]
    UnsupportedClassification(String),

    /// An arccos argument exceeded 1 by more than rounding can explain,
    /// indicating inconsistent input data rather than float noise.
    #[error("inconsistent invariants: {0}")]
    InconsistentInvariants(String),

    #[error("nothing traced: keep set must contain one or two parties")]
    NothingTraced,

    #[error("monotonicity violation: {0}")]
    MonotonicityViolation(String),

    #[error("degenerate step: {0}")]
    DegenerateStep(String),
}

pub type Result<T> = std::result::Result<T, Error>;
