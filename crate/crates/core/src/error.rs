use thiserror::Error;

use crate::mvee::MveeResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The solver ran out of iterations; the best iterate is attached.
    #[error("no convergence after {iterations} iterations (violation {violation:e})")]
    NonConvergence {
        iterations: usize,
        violation: f64,
        best: Box<MveeResult>,
    },

    #[error("numerical rank failure: {0}")]
    NumericalRank(String),

    #[error("greedy selection stalled at step {step}: all projections below {threshold:e}")]
    SelectionStalled { step: usize, threshold: f64 },

    #[error("enumeration too large: {count} items exceeds limit {limit}")]
    TooLarge { count: f64, limit: f64 },
}

impl Error {
    /// True for failures caused by the numbers rather than by the caller's arguments.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPsd(_)
                | Error::Precondition(_)
                | Error::Degenerate(_)
                | Error::NonConvergence { .. }
                | Error::NumericalRank(_)
                | Error::SelectionStalled { .. }
        )
    }
}
