//! Harmonic analysis on the quantum E(2) group: q-special functions, matrix
//! elements of the principal representations, a truncated-operator oracle and
//! a verifier for the summation identities between them.

pub mod error;
pub mod identities;
pub mod qalgebra;
pub mod qcore;
pub mod qspecial;
pub mod repmatrix;

pub use error::{Error, Result};
