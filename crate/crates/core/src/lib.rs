// Comparisons are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod experiments;
pub mod models;
pub mod numerics;
pub mod points;
pub mod quantile;
pub mod special;

pub use error::{Error, Result};
