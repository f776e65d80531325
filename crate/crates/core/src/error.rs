use thiserror::Error;

use crate::mps::MpsError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("constraint matrix has no nonzero entries")]
    ZeroMatrix,

    #[error("linear system is singular: {0}")]
    Singular(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("instance too large for the brute-force oracle (n = {n}, m = {m})")]
    OracleTooLarge { n: usize, m: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("malformed trace: {0}")]
    MalformedTrace(String),

    #[error(transparent)]
    Mps(#[from] MpsError),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}
