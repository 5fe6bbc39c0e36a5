//! Gaussian-process representation of model discrepancy.
//!
//! Discrepancy in one data stream is conditioned on model-data residuals at a
//! subset of "supporting" observation locations. The conditional expectation
//! is evaluated at every location, and its norm at the supports yields the
//! penalty term entering the parameter density.

mod conditional;
mod kernel;
mod support;

pub use conditional::{
    conditional_discrepancy, conditional_discrepancy_with_noise, gp_conditional_draw,
    log_discrepancy_penalty, ConditionalSampler, DiscrepancyEstimate,
};
pub use kernel::{correlation_matrix, kernel_matrix, KernelParams};
pub use support::{
    psi_truncation_bounds, select_supporting_points, select_supporting_points_at,
    SupportSelection, MIN_SUPPORTS,
};

use crate::error::{Error, Result};

/// Observation locations of one stream, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Locations(Vec<f64>);

impl Locations {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input("locations must not be empty"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite location {bad}")));
        }
        values.sort_by(f64::total_cmp);
        Ok(Locations(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0[0]
    }

    pub fn max(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn subset(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.0[i]).collect()
    }
}
