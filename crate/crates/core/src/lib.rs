//! Numerical laboratory for absolutely summing operators and vector-valued
//! integral norms on finite-dimensional weighted `ℓ_p` spaces.

pub mod error;
pub mod spaces;

pub use error::{Error, Result};
pub mod summing;
pub mod vfun;
pub mod harness;
pub mod suites;
