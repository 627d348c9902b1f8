//! Weighted polynomial Bergman kernels on C^d for radial and tensorized-radial
//! potentials: droplets and obstacle functions, edge/bulk scaling limits
//! against erfc-type universal kernels, partial (low-degree) kernels, and
//! counting statistics of the associated determinantal point process.
//!
//! Everything is deterministic: quadrature grids, direction searches, and
//! Monte Carlo all run from explicit seeds or fixed node sets.




pub mod cli;
pub mod geometry;
pub mod kernels;
pub mod limits;
pub mod logdomain;
pub mod potentials;
pub mod quad;
pub mod specfun;
pub mod stats;


pub use num_complex::Complex64 as Cplx;

/// Crate-wide error type. `Invalid` covers domain/precondition violations
/// (CLI exit code 2); `Numeric` covers runtime numerical failures such as
/// overflow, non-convergence, or factorization breakdown (CLI exit code 3).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}

pub(crate) fn numeric<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Numeric(msg.into()))
}
