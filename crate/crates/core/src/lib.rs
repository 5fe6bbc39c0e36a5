//! Bayesian inversion of deterministic models against several observation
//! streams, with per-stream model discrepancy represented by a Gaussian
//! process conditioned on residuals at supporting locations.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gp;
pub mod inference;
pub mod linalg;
pub mod models;
pub mod optimize;
pub mod report;
pub mod stream;

pub use error::{Error, Result};
