//! Gaussian covariance simulation of two cavity mirrors entangled by a
//! squeezed reservoir.

pub mod cli;
pub mod coefficients;
pub mod compiler;
pub mod dynamics;
pub mod error;
pub mod full;
pub mod gaussian;
pub mod harmonic;
pub mod reduced;

pub use error::{Error, Result};
