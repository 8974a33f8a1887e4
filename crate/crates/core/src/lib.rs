#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod discretization;
pub mod error;
pub mod expr;
pub mod functionals;
pub mod harness;
pub mod norms;
pub mod phi;
pub mod solver;

pub use error::{Error, Result};
