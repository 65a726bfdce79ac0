//! Numerical toolkit for bilinear pseudo-differential operators on `R^n`, `n = 1, 2`.
//!
//! Functions live on a periodic box ([`field_core`]); partitions of unity
//! ([`partitions`]), function-space norms ([`spaces`]), symbol-class norms
//! ([`symbols`]), the operator and its block decomposition ([`bilinear`]) and the
//! counterexample families ([`sharpness`]) are built on top.

pub mod acceptance;
pub mod bilinear;
pub mod error;
pub mod field_core;
pub mod fit;
pub mod partitions;
pub mod scalar;
pub mod sharpness;
pub mod spaces;
pub mod symbols;

pub use error::{Error, Result};
pub use field_core::{Field, GridSpec, Space};
pub use num_complex::Complex;
pub use scalar::Real;

pub type C64 = Complex<f64>;
pub type Field64 = Field<f64>;
pub type Field32 = Field<f32>;
