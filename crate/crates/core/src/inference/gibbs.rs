use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::priors::InverseGammaPrior;
use crate::error::{Error, Result};
use crate::linalg::spd_factor;

/// Draws the normalized discrepancy variance from
/// `IG(alpha + n_s/2, beta + delta_s^T Lambda_ss^{-1} delta_s / (2 sigma2_eps))`.
///
/// `lambda_ss` is the correlation matrix at the supports and
/// `sigma2_eps_mean` the stream's mean observation-noise variance.
pub fn gibbs_sigma2<R: Rng + ?Sized>(
    delta_s: &DVector<f64>,
    lambda_ss: &DMatrix<f64>,
    sigma2_eps_mean: f64,
    prior: &InverseGammaPrior,
    rng: &mut R,
) -> Result<f64> {
    let (shape, scale) = sigma2_posterior(delta_s, lambda_ss, sigma2_eps_mean, prior)?;
    draw_inverse_gamma(shape, scale, rng)
}

/// Shape and scale of the conditional inverse gamma.
pub fn sigma2_posterior(
    delta_s: &DVector<f64>,
    lambda_ss: &DMatrix<f64>,
    sigma2_eps_mean: f64,
    prior: &InverseGammaPrior,
) -> Result<(f64, f64)> {
    let n_s = delta_s.len();
    if n_s == 0 {
        return Ok((prior.alpha, prior.beta));
    }
    if lambda_ss.shape() != (n_s, n_s) {
        return Err(Error::input("correlation matrix does not match the discrepancy vector"));
    }
    if !(sigma2_eps_mean > 0.0) {
        return Err(Error::input("mean observation-noise variance must be positive"));
    }
    let f = spd_factor(lambda_ss, 1.0).ok_or(Error::Singular {
        what: "Lambda_ss",
        psi: f64::NAN,
        spacing: f64::NAN,
    })?;
    let q = f.quadform(delta_s);
    Ok((
        prior.alpha + 0.5 * n_s as f64,
        prior.beta + q / (2.0 * sigma2_eps_mean),
    ))
}

/// `1 / Gamma(shape, rate = scale)`.
pub fn draw_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    let g = Gamma::new(shape, 1.0 / scale)
        .map_err(|e| Error::input(format!("inverse gamma ({shape}, {scale}): {e}")))?;
    Ok(1.0 / g.sample(rng))
}
