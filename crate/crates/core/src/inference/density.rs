//! Log-densities of the parameters under the ignore and GP scenarios, and
//! the full conditional of the correlation length.

use rand::Rng;

use super::priors::{GammaPrior, Priors};
use crate::error::Result;
use crate::gp::{
    conditional_discrepancy_with_noise, log_discrepancy_penalty, psi_truncation_bounds,
    select_supporting_points, DiscrepancyEstimate, KernelParams, SupportSelection,
};
use crate::models::ForwardModel;
use crate::stream::ObservationStream;

/// Per-stream GP hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpHyperState {
    pub psi: f64,
    /// Discrepancy variance divided by the stream's mean noise variance.
    pub sigma2_norm: f64,
}

impl GpHyperState {
    pub fn sigma2_d(&self, stream: &ObservationStream) -> f64 {
        self.sigma2_norm * stream.mean_sigma2_eps()
    }

    pub fn kernel(&self, stream: &ObservationStream) -> Result<KernelParams> {
        KernelParams::new(self.psi, self.sigma2_d(stream))
    }
}

/// Contribution of one stream to the GP-scenario log density.
#[derive(Debug, Clone)]
pub struct StreamTerms {
    pub estimate: DiscrepancyEstimate,
    /// `-1/2 sum d_i^2 / sigma2_eps_i` with `d = o - (g + delta_hat)`.
    pub data: f64,
    /// `-1/2 delta_s^T K_ss^{-1} delta_s`.
    pub penalty: f64,
}

impl StreamTerms {
    pub fn total(&self) -> f64 {
        self.data + self.penalty
    }
}

/// Recomputes the latent discrepancy from the current residuals and returns
/// the stream's data and penalty terms.
pub fn stream_terms(
    stream: &ObservationStream,
    prediction: &[f64],
    params: &KernelParams,
    support: &SupportSelection,
) -> Result<StreamTerms> {
    let z = stream.residuals(prediction);
    let z_s: Vec<f64> = support.support.iter().map(|&i| z[i]).collect();
    let noise_s: Vec<f64> = support.support.iter().map(|&i| stream.sigma2_eps[i]).collect();
    let estimate = conditional_discrepancy_with_noise(&z_s, &stream.locations, support, params, &noise_s)?;
    let delta = estimate.delta_full(support);
    let d: Vec<f64> = z.iter().zip(&delta).map(|(zi, di)| zi - di).collect();
    let data = -0.5 * stream.weighted_sse(&d);
    let penalty = log_discrepancy_penalty(&estimate);
    Ok(StreamTerms {
        estimate,
        data,
        penalty,
    })
}

/// Log density ignoring discrepancy: `-1/2 sum_k S_k + ln p(theta)`.
pub fn log_density_ignore(
    theta: &[f64],
    streams: &[ObservationStream],
    model: &dyn ForwardModel,
    priors: &Priors,
) -> Result<f64> {
    let prior = priors.ln_theta(theta);
    if prior == f64::NEG_INFINITY {
        return Ok(prior);
    }
    let predictions = model.evaluate(theta)?;
    Ok(log_density_ignore_at(streams, &predictions) + prior)
}

pub(crate) fn log_density_ignore_at(streams: &[ObservationStream], predictions: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for (stream, g) in streams.iter().zip(predictions) {
        total += -0.5 * stream.weighted_sse(&stream.residuals(g));
    }
    total
}

/// Log density of `theta` with latent GP discrepancies recomputed from the
/// residuals at each stream's supports.
pub fn log_density_gp(
    theta: &[f64],
    hyper: &[GpHyperState],
    supports: &[SupportSelection],
    streams: &[ObservationStream],
    model: &dyn ForwardModel,
    priors: &Priors,
) -> Result<f64> {
    let prior = priors.ln_theta(theta);
    if prior == f64::NEG_INFINITY {
        return Ok(prior);
    }
    let predictions = model.evaluate(theta)?;
    let mut total = 0.0;
    for (k, stream) in streams.iter().enumerate() {
        let terms = stream_terms(stream, &predictions[k], &hyper[k].kernel(stream)?, &supports[k])?;
        total += terms.data + terms.penalty;
    }
    Ok(total + prior)
}

fn psi_terms_at(
    psi: f64,
    stream: &ObservationStream,
    prediction: &[f64],
    sigma2_d: f64,
    support: &SupportSelection,
) -> Result<Option<StreamTerms>> {
    let (lower, upper) = psi_truncation_bounds(&stream.locations, support)?;
    if !(psi >= lower && psi <= upper) {
        return Ok(None);
    }
    stream_terms(stream, prediction, &KernelParams::new(psi, sigma2_d)?, support).map(Some)
}

/// Full conditional of the correlation length at a given support selection:
/// data term + penalty + Gamma prior, `-inf` outside the truncation bounds.
pub fn log_conditional_psi_at(
    psi: f64,
    stream: &ObservationStream,
    prediction: &[f64],
    sigma2_d: f64,
    support: &SupportSelection,
    prior: &GammaPrior,
) -> Result<f64> {
    Ok(match psi_terms_at(psi, stream, prediction, sigma2_d, support)? {
        Some(t) => t.total() + prior.ln_density(psi),
        None => f64::NEG_INFINITY,
    })
}

/// Full conditional value of `psi` with supports re-selected for it.
#[derive(Debug, Clone)]
pub struct PsiConditional {
    pub log_density: f64,
    pub support: SupportSelection,
    /// `None` when `psi` falls outside the truncation bounds.
    pub terms: Option<StreamTerms>,
}

pub fn log_conditional_psi<R: Rng + ?Sized>(
    psi: f64,
    stream: &ObservationStream,
    prediction: &[f64],
    sigma2_d: f64,
    prior: &GammaPrior,
    rng: &mut R,
) -> Result<PsiConditional> {
    let support = select_supporting_points(&stream.locations, psi, rng)?;
    let terms = psi_terms_at(psi, stream, prediction, sigma2_d, &support)?;
    let log_density = match &terms {
        Some(t) => t.total() + prior.ln_density(psi),
        None => f64::NEG_INFINITY,
    };
    Ok(PsiConditional {
        log_density,
        support,
        terms,
    })
}
