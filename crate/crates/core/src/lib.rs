//! Numerical laboratory for the fractional Laplacian with a variable
//! exponent `p(x, y)`: exponent fields, variable-exponent norms, a nonlocal
//! grid discretization, an energy minimizer and regularity diagnostics.

// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exponent;
pub mod geometry;
pub mod grid;
pub mod regularity;
pub mod solver;
pub mod spaces;

pub use error::{LabError, Result};
