//! Exact finite-size results for the 2D Ising model on a periodic lattice.
//!
//! The lattice has `2M+1` columns and `2N+1` rows with periodic wrap in both
//! directions. Two independent routes are provided for every quantity:
//!
//! * closed forms built from the free-fermion (Clifford algebra) description
//!   of the row-to-row transfer matrix: the spectrum, the blocks `A, B, C, D`
//!   relating the periodic and anti-periodic Fock bases, and spin matrix
//!   elements as Pfaffians;
//! * a brute-force oracle that builds the transfer matrix on the full
//!   `2^(2M+1)`-dimensional spin space and diagonalises it.
//!
//! On top of these sit the Bugrij–Lisovyy product formula for spin matrix
//! elements, the elliptic uniformization of the spectral curve, and the
//! factorization identities for the summability kernels.
//!
//! Start with [`spectral::CouplingParams::new`]; the `examples/` directory has
//! one runnable program per capability.

pub mod blfactor;
pub mod cli;
pub mod correlate;
pub mod elliptic;
pub mod error;
pub mod oracle;
pub mod pfaffian;
pub mod rotation;
pub mod selfcheck;
pub mod spectral;
pub mod spinme;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::{CouplingParams, Sector};

/// Crate version, embedded in CLI reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
