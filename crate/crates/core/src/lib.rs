// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod coeffs;
pub mod config;
pub mod density;
pub mod edgeworth;
pub mod entropy;
pub mod error;
pub mod harness;
pub mod mixture;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
