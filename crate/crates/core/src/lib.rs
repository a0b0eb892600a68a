// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analyze;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod model;
pub mod seed;
pub mod suites;
pub mod systems;

pub use error::{Error, Result};
