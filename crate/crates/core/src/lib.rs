//! Continuous wavelet transforms, Riesz potentials and Radon-type transforms on
//! the space of real rectangular matrices, with their reconstruction formulas.

pub mod config;
pub mod cone;
pub mod error;
pub mod field;
pub mod harness;
pub mod inversion;
pub mod linalg;
pub mod quadrature;
pub mod sampling;
pub mod special;
pub mod transforms;
pub mod wavelet;

pub use error::{Error, Result};
