//! Numerical toolkit for weight sequences, weight functions and the
//! associated weight matrices of ultradifferentiable function classes.
//!
//! Everything works on finite prefixes and sampled grids, so asymptotic
//! properties are replaced by explicit finite-window estimators with pinned
//! tolerances (see [`numeric`]).

pub mod error;
pub mod exec;
pub mod numeric;
pub mod func;
pub mod seq;
pub mod bmt;
pub mod verify;
pub mod io;

pub use error::{Error, Result};
