//! Error type shared by every module.

use thiserror::Error;

/// Everything that can go wrong in a computation.
///
/// The message always names the violated condition so that CLI reports can
/// pass it through unchanged.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the requested function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A dense construction or enumeration would exceed its size guard.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// Eigenvalues collide and a labelling cannot be made unique.
    #[error("degenerate spectrum: {0}")]
    Degenerate(String),
    /// An elliptic function was evaluated too close to one of its poles.
    #[error("pole: {0}")]
    Pole(String),
    /// The request is valid in general but not supported for these inputs.
    #[error("unsupported regime: {0}")]
    Unsupported(String),
    /// A matrix that must be inverted is numerically singular.
    #[error("singular matrix: {0}")]
    Singular(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn capacity<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Capacity(msg.into()))
}
