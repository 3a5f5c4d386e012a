use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(isize, isize),

    #[error("degree {degree} out of range for dimension {n}")]
    DegreeOutOfRange { n: usize, degree: isize },

    #[error("invalid multi-index {0:?}: entries must be strictly increasing in 1..=n")]
    InvalidMultiIndex(Vec<usize>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sampled coefficient passed to a symbolic operator; use the finite-difference variant (fd_d / fd_codifferential)")]
    SampledCoefficient,

    #[error("point {0:?} lies outside the validity region of a sampled coefficient")]
    OutsideValidity(Vec<f64>),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("quadrature did not converge: tail estimate {tail:.3e} exceeds tolerance {tol:.3e}")]
    NonConvergence { tail: f64, tol: f64 },

    #[error("declared decay violated: fitted exponent {fitted:.3} < required {required:.3}")]
    DecayViolation { fitted: f64, required: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("weight window mismatch: {0}")]
    WindowMismatch(String),

    #[error("time class rejected: estimate {estimate:.4} exceeds budget {budget:.4}")]
    TimeClassRejected { estimate: f64, budget: f64 },

    #[error("insufficient time sampling: {0} points (need at least 8)")]
    InsufficientTimeSampling(usize),

    #[error("derivative order {order} exceeds smoothness budget {budget}")]
    SmoothnessBudget { order: usize, budget: usize },

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
