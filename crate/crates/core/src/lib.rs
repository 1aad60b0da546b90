//! Inverses of Vandermonde matrices on geometric nodes `1, b, b², …`:
//! exact and rigorous entries, the largest entry and its limit.

pub mod cli;
mod error;
pub mod extremal;
pub mod limits;
pub mod scalar;
pub mod suite;
pub mod symfunc;
pub mod vandinv;

pub use error::{Error, Result};
