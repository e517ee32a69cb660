//! Error type shared by all modules.

use thiserror::Error;

/// Failures raised by domain construction, solvers and verification drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular matrix: zero pivot at row {row}")]
    Singular { row: usize },
    #[error("width {width} is too close to the critical width {critical} of sector {sector}")]
    NearCritical { width: f64, critical: f64, sector: usize },
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { solver: &'static str, iterations: usize, residual: f64 },
    #[error("field violates the symmetry class (defect {defect:.3e})")]
    Symmetry { defect: f64 },
    #[error("branch collapsed onto the trivial solution at d = {width}")]
    Collapse { width: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
