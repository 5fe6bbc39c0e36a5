use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Hyperparameters of the squared-exponential discrepancy kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    /// Correlation length, in location units.
    pub psi: f64,
    /// Signal variance, in squared observation units.
    pub sigma2_d: f64,
}

impl KernelParams {
    pub fn new(psi: f64, sigma2_d: f64) -> Result<Self> {
        if !(psi.is_finite() && psi > 0.0) {
            return Err(Error::input(format!("correlation length must be positive, got {psi}")));
        }
        if !(sigma2_d.is_finite() && sigma2_d >= 0.0) {
            return Err(Error::input(format!(
                "signal variance must be nonnegative, got {sigma2_d}"
            )));
        }
        Ok(KernelParams { psi, sigma2_d })
    }

    #[inline]
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        let d = (a - b) / self.psi;
        self.sigma2_d * (-d * d).exp()
    }
}

/// Noise-free covariance `sigma2_d * exp(-(a_p - b_q)^2 / psi^2)`.
///
/// Observation noise is added by callers on the diagonal of `K_z` only.
pub fn kernel_matrix(locs_a: &[f64], locs_b: &[f64], params: &KernelParams) -> Result<DMatrix<f64>> {
    if let Some(bad) = locs_a.iter().chain(locs_b).find(|v| !v.is_finite()) {
        return Err(Error::input(format!("non-finite location {bad}")));
    }
    Ok(DMatrix::from_fn(locs_a.len(), locs_b.len(), |p, q| {
        params.eval(locs_a[p], locs_b[q])
    }))
}

/// Correlation matrix (unit signal variance) between two location sets.
pub fn correlation_matrix(locs_a: &[f64], locs_b: &[f64], psi: f64) -> Result<DMatrix<f64>> {
    kernel_matrix(locs_a, locs_b, &KernelParams::new(psi, 1.0)?)
}
