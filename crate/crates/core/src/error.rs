use alloc::string::String;

/// Errors raised by the estimation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("design is singular or too ill-conditioned (reciprocal condition number {rcond:e})")]
    SingularDesign { rcond: f64 },

    #[error("need more observations than coefficients (n = {n}, q = {q})")]
    InsufficientObservations { n: usize, q: usize },

    #[error("column {column} has zero variance")]
    ZeroVariance { column: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("correlation {0} is outside [0, 1)")]
    DegenerateR(f64),

    #[error("delta must be non-negative, got {0}")]
    NegativeDelta(f64),

    #[error("variance budget {budget} is below the minimum attainable variance {minimum}")]
    BudgetTooSmall { budget: f64, minimum: f64 },

    #[error("invalid weights: {0}")]
    InvalidWeights(&'static str),

    #[error("invalid sign arrangement: entries must be +1 or -1")]
    InvalidSigns,

    #[error("group is empty")]
    EmptyGroup,

    #[error("index {index} out of range for {len} columns")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("duplicate index {0} in group")]
    DuplicateIndex(usize),

    #[error("eigendecomposition did not converge")]
    EigenFailure,

    #[error("group of size {size} exceeds the enumeration limit of {max}")]
    GroupTooLarge { size: usize, max: usize },

    #[error("projected gradient did not converge within {iterations} iterations")]
    QpNonConvergence { iterations: usize },

    #[error("weight vector has zero norm")]
    ZeroWeight,

    #[error("squared radius {c} is below the minimum squared norm {minimum}")]
    RadiusTooSmall { c: f64, minimum: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = core::result::Result<T, Error>;
