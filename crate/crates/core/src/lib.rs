// Index loops mirror the tensor notation, and negated comparisons reject NaN on purpose.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod fluid;
pub mod fuchsian;
pub mod geometry;
pub mod harness;
pub mod par;
pub mod solver;

pub use error::{Error, Result};

/// Crate version recorded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
