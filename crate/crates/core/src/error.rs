use thiserror::Error;

use crate::linops::Signal;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    /// The L1 Tikhonov solver could not certify its iterate. The best iterate
    /// found is carried along so callers can decide what to do with it.
    #[error("L1 subproblem not certified: gap {gap:e} > tol {tol:e} after {iterations} iterations")]
    Uncertified {
        gap: f64,
        tol: f64,
        iterations: usize,
        best: Signal,
    },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("Potts-to-sparse transform undefined: all row sums of the operator vanish")]
    TransformUndefined,

    #[error("unsupported data-term exponent p = {0}")]
    UnsupportedExponent(u32),

    #[error("infeasible specification: {0}")]
    Infeasible(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
