// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bco;
pub mod conversion;
pub mod environments;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod randomness;
pub mod regret;

pub use error::{Error, Result};
