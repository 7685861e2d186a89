use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point is infeasible (violation {violation:e})")]
    Infeasible { violation: f64 },

    #[error("halfspace projection did not converge after {cycles} cycles (residual {residual:e})")]
    ProjectionNotConverged {
        cycles: usize,
        residual: f64,
        best: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
