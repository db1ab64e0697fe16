// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod correlation;
pub mod dephasing;
pub mod error;
pub mod harness;
pub mod initial_state;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
