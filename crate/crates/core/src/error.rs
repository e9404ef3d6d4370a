use thiserror::Error;

use crate::problems::mtx::MatrixMarketError;

/// Errors raised by kernels, solvers and problem builders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid sparse matrix: {0}")]
    InvalidMatrix(String),

    #[error("factorization failed: singular pivot at row {row} (|pivot| = {magnitude:e})")]
    SingularPivot { row: usize, magnitude: f64 },

    #[error("matrix is not square ({nrows}x{ncols})")]
    NotSquare { nrows: usize, ncols: usize },

    #[error("zero diagonal entry at index {index} of triangular factor")]
    ZeroDiagonal { index: usize },

    #[error("requested {steps} substitution steps on a dimension-{dim} factor")]
    StepsExceedDim { steps: usize, dim: usize },

    #[error("M-norm undefined: x^T M x = {value:e} < 0")]
    NegativeQuadraticForm { value: f64 },

    #[error("zero right-hand side")]
    ZeroRhs,

    #[error("breakdown at step {step}: {reason}")]
    Breakdown { step: usize, reason: String },

    #[error("FOM breakdown at step {step}: singular Hessenberg system")]
    FomBreakdown { step: usize },

    #[error("memory budget admits no GMRES iterations")]
    NoRestartBudget,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid problem specification: {0}")]
    InvalidProblem(String),

    #[error(transparent)]
    MatrixMarket(#[from] MatrixMarketError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}
