//! Exact symbolic toolkit for truncated star products, Poisson calculus and
//! Lie algebroids on a polynomial model of ℝⁿ.
//!
//! Everything is exact over ℚ: equality checks are structural comparisons of
//! canonical forms, never numerical.

pub mod calculus;
pub mod cli;
pub mod diffop;
pub mod error;
pub mod kernel;
pub mod liealgebroid;
pub mod parser;
pub mod poisson;
pub mod qclimit;
pub mod starprod;

pub use error::{Error, Result};
