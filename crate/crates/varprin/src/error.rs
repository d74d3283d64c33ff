//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by distance construction, sequence analysis, the two
/// engines, the applications and the problem-file layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown point `{0}`")]
    UnknownPoint(String),

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("distance axiom violated: {0}")]
    AxiomViolation(String),

    #[error("scan budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("iteration limit reached: {0}")]
    IterationLimit(String),

    #[error("nested intersection is not a singleton: {0}")]
    NonSingleton(String),

    #[error("trace inconsistent with inputs: {0}")]
    TraceMismatch(String),

    #[error("lower estimate violated: {0}")]
    EstimateViolation(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("set-valued map has an empty graph")]
    EmptyGraph,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
