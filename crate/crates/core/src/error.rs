use thiserror::Error;

use crate::scalar::ScalarError;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("size guard exceeded: {0}")]
    Size(String),
    #[error("unsupported backend: {0}")]
    UnsupportedBackend(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("comparison undecidable at the {bits}-bit precision ceiling")]
    Undecidable { bits: u32 },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
