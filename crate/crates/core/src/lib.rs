//! Isotropic vectors of nondegenerate diagonal quadratic forms over ℚ.
//!
//! [`solver::dispatch`] is the main entry point. Forms of dimension 2 and 3
//! are handled by closed formulas and a Legendre solver; dimensions 4 and 5
//! go through quadratic fields and square-class systems over F₂; larger
//! forms split into smaller ones along a common represented value.

pub mod arith;
pub mod cli;
pub mod error;
pub mod oracle;
pub mod places;
pub mod quadfield;
pub mod solver;
pub mod sqclasses;
pub mod ternary;

pub use error::{Error, Result};
pub use places::{DiagonalForm, Place};
pub use solver::{dispatch, verify};
pub use ternary::IsotropicVector;
