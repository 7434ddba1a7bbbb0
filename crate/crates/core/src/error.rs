use thiserror::Error;

use crate::vcycle::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why an outer multigrid iteration stopped without reaching the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    /// The relative residual grew for three consecutive cycles.
    Diverged,
    /// The iteration budget ran out.
    MaxIterations,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("levels are not nested: {0}")]
    NotNested(String),

    #[error("operator has no unknowns (every vertex is Dirichlet)")]
    EmptySystem,

    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },

    #[error("zero pivot in tridiagonal block {line} at row {row}")]
    ZeroPivot { line: usize, row: usize },

    #[error("coarse matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("line block {line} is not a contiguous tridiagonal block")]
    NonContiguousLine { line: usize },

    #[error("negative energy defect {defect:e} (exact energy {exact:e})")]
    NegativeEnergyDefect { defect: f64, exact: f64 },

    #[error("solver stopped after {} iterations: {reason:?}", report.iterations)]
    NotConverged {
        reason: FailureReason,
        report: Box<SolveReport>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
