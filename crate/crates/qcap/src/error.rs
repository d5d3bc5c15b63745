//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QcapError {
    #[error("matrix is not Hermitian: max |m - m†| = {deviation:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("singular matrix: eigenvalue {eigenvalue:.3e} below kernel threshold under strict kernel policy")]
    SingularMatrix { eigenvalue: f64 },

    #[error("dimension {dim} exceeds configured cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("subsystem dimensions {dims:?} do not factor matrix dimension {dim}")]
    BadFactorization { dim: usize, dims: Vec<usize> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Kraus operators are not trace-preserving: max |ΣK†K - I| = {deviation:.3e}")]
    NotTracePreserving { deviation: f64 },

    #[error("channel is not completely positive: min Choi eigenvalue = {min_choi_eigenvalue:.3e}")]
    NotCompletelyPositive { min_choi_eigenvalue: f64 },

    #[error("invalid channel family parameter: {0}")]
    BadParameter(String),

    #[error("partial POVM elements exceed identity: max eigenvalue of Σ E - I is {excess:.3e}")]
    ElementsExceedIdentity { excess: f64 },

    #[error("internal cross-check failed in {context}: two evaluation routes disagree by {discrepancy:.3e}")]
    InternalInconsistency { context: String, discrepancy: f64 },

    #[error("argument must be positive definite: min eigenvalue {eigenvalue:.3e}")]
    SingularArgument { eigenvalue: f64 },

    #[error("solver did not converge after {iterations} iterations (best gap {gap:.3e})")]
    NotConverged { iterations: usize, gap: f64 },

    #[error("enumeration size {size} exceeds cap {cap}")]
    EnumerationTooLarge { size: u128, cap: u128 },

    #[error("operation requires a deterministic block code")]
    NotBlockCode,

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("regularized POVM element still fails positive definiteness: min eigenvalue {eigenvalue:.3e}")]
    SingularElement { eigenvalue: f64 },

    #[error("bad configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QcapError>;
