//! Pointwise predictive bands of model predictions and of process
//! predictions (model plus discrepancy realization).

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::quantile::{check_probabilities, quantile_sorted, DEFAULT_PROBABILITIES};
use crate::error::{Error, Result};
use crate::gp::{gp_conditional_draw, select_supporting_points, KernelParams};
use crate::inference::{stream_terms, ArchiveSample, PosteriorArchive, Scenario};
use crate::models::ForwardModel;
use crate::optimize::{FixedGpConfig, OptimumReport};
use crate::stream::ObservationStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictiveOptions {
    /// Lower, middle and upper quantile probabilities.
    pub probabilities: [f64; 3],
    /// Archives with more samples are thinned evenly to this many.
    pub max_samples: usize,
}

impl Default for PredictiveOptions {
    fn default() -> Self {
        PredictiveOptions {
            probabilities: DEFAULT_PROBABILITIES,
            max_samples: 2000,
        }
    }
}

impl PredictiveOptions {
    pub fn validate(&self) -> Result<()> {
        check_probabilities(&self.probabilities)?;
        if self.max_samples == 0 {
            return Err(Error::config("max_samples must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileBand {
    pub lower: Vec<f64>,
    pub median: Vec<f64>,
    pub upper: Vec<f64>,
}

impl QuantileBand {
    /// Pointwise quantiles over rows of `draws` (one row per sample).
    fn from_draws(draws: &[Vec<f64>], n: usize, p: &[f64; 3]) -> Self {
        let mut band = QuantileBand {
            lower: Vec::with_capacity(n),
            median: Vec::with_capacity(n),
            upper: Vec::with_capacity(n),
        };
        let mut column = vec![0.0; draws.len()];
        for i in 0..n {
            for (c, d) in column.iter_mut().zip(draws) {
                *c = d[i];
            }
            column.sort_by(f64::total_cmp);
            band.lower.push(quantile_sorted(&column, p[0]));
            band.median.push(quantile_sorted(&column, p[1]));
            band.upper.push(quantile_sorted(&column, p[2]));
        }
        band
    }

    pub fn len(&self) -> usize {
        self.median.len()
    }

    pub fn is_empty(&self) -> bool {
        self.median.is_empty()
    }

    /// Whether `value` lies in `[lower_i, upper_i]`.
    pub fn covers(&self, i: usize, value: f64) -> bool {
        self.lower[i] <= value && value <= self.upper[i]
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }
}

/// Bands of one stream at its observation locations.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveBand {
    pub stream: String,
    pub probabilities: [f64; 3],
    pub locations: Vec<f64>,
    /// Quantiles of `g(theta)`.
    pub model: QuantileBand,
    /// Quantiles of `g(theta) + delta`; absent under the ignore scenario.
    pub process: Option<QuantileBand>,
}

impl PredictiveBand {
    /// Number of observations outside the process band, or the model band
    /// when there is none.
    pub fn outside(&self, observations: &[f64]) -> usize {
        let band = self.process.as_ref().unwrap_or(&self.model);
        observations
            .iter()
            .enumerate()
            .filter(|(i, o)| !band.covers(*i, **o))
            .count()
    }
}

fn evenly_spaced(n: usize, max: usize) -> Vec<usize> {
    if n <= max {
        (0..n).collect()
    } else {
        (0..max).map(|i| i * n / max).collect()
    }
}

/// Model and (under the GP scenario) process predictions of one sample.
type SamplePredictions = (Vec<Vec<f64>>, Option<Vec<Vec<f64>>>);

fn sample_predictions(
    archive: &PosteriorArchive,
    sample: &ArchiveSample,
    model: &dyn ForwardModel,
    streams: &[ObservationStream],
    rng: &mut ChaCha8Rng,
) -> Result<SamplePredictions> {
    let g = model.evaluate(&sample.theta)?;
    if g.len() != streams.len() || g.iter().zip(streams).any(|(p, s)| p.len() != s.len()) {
        return Err(Error::Model("prediction shape does not match the streams".into()));
    }
    if archive.scenario == Scenario::Ignore {
        return Ok((g, None));
    }
    let mut process = Vec::with_capacity(streams.len());
    for (k, stream) in streams.iter().enumerate() {
        let psi = sample.psi[k];
        let params = KernelParams::new(psi, sample.sigma2[k] * stream.mean_sigma2_eps())?;
        let support = select_supporting_points(&stream.locations, psi, rng)?;
        let terms = stream_terms(stream, &g[k], &params, &support)?;
        let delta = gp_conditional_draw(&terms.estimate, &stream.locations, &support, &params, rng)?;
        process.push(g[k].iter().zip(&delta).map(|(a, b)| a + b).collect());
    }
    Ok((g, Some(process)))
}

/// Pointwise predictive quantiles per stream over the archive samples.
///
/// Each retained sample contributes `g(theta)` to the model band. Under the
/// GP scenario, supports are re-selected for the sample's correlation length,
/// the latent discrepancy is recomputed from the residuals and one
/// conditional realization is added for the process band.
pub fn predictive_posterior<R: Rng + ?Sized>(
    archive: &PosteriorArchive,
    model: &dyn ForwardModel,
    streams: &[ObservationStream],
    rng: &mut R,
    options: &PredictiveOptions,
) -> Result<Vec<PredictiveBand>> {
    options.validate()?;
    if archive.is_empty() {
        return Err(Error::EmptyArchive);
    }
    archive.validate()?;
    if archive.stream_names.len() != streams.len() {
        return Err(Error::input(format!(
            "archive has {} streams, data has {}",
            archive.stream_names.len(),
            streams.len()
        )));
    }
    for (name, s) in archive.stream_names.iter().zip(streams) {
        if *name != s.name {
            return Err(Error::input(format!("archive stream '{name}' does not match data stream '{}'", s.name)));
        }
    }

    let chosen = evenly_spaced(archive.samples.len(), options.max_samples);
    // one generator per sample keeps results independent of evaluation order
    let base: u64 = rng.random();
    let eval = |j: usize, i: usize| {
        let mut r = ChaCha8Rng::seed_from_u64(base);
        r.set_stream(j as u64);
        sample_predictions(archive, &archive.samples[i], model, streams, &mut r)
    };
    #[cfg(feature = "parallel")]
    let per_sample: Vec<_> = {
        use rayon::prelude::*;
        chosen.par_iter().enumerate().map(|(j, &i)| eval(j, i)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_sample: Vec<_> = chosen.iter().enumerate().map(|(j, &i)| eval(j, i)).collect();
    let per_sample = per_sample.into_iter().collect::<Result<Vec<_>>>()?;

    let p = options.probabilities;
    Ok(streams
        .iter()
        .enumerate()
        .map(|(k, stream)| {
            let n = stream.len();
            let g: Vec<Vec<f64>> = per_sample.iter().map(|(g, _)| g[k].clone()).collect();
            let process = (archive.scenario == Scenario::Gp).then(|| {
                let d: Vec<Vec<f64>> = per_sample
                    .iter()
                    .map(|(_, pr)| pr.as_ref().map(|v| v[k].clone()).unwrap_or_default())
                    .collect();
                QuantileBand::from_draws(&d, n, &p)
            });
            PredictiveBand {
                stream: stream.name.clone(),
                probabilities: p,
                locations: stream.locations.as_slice().to_vec(),
                model: QuantileBand::from_draws(&g, n, &p),
                process,
            }
        })
        .collect())
}

/// Draws from the Laplace approximation `N(theta_hat, laplace_cov)` packed
/// as a single-chain archive, so that optimizer output can be reported like
/// sampler output. With a fixed GP configuration the archive carries its
/// correlation lengths and normalized variances under the GP scenario.
pub fn laplace_archive<R: Rng + ?Sized>(
    report: &OptimumReport,
    model: &dyn ForwardModel,
    streams: &[ObservationStream],
    fixed: Option<&FixedGpConfig>,
    draws: usize,
    rng: &mut R,
) -> Result<PosteriorArchive> {
    let cov = report
        .laplace_cov
        .as_ref()
        .ok_or_else(|| Error::Diagnostic("no Laplace covariance: Hessian not positive definite".into()))?;
    let d = report.theta_hat.len();
    let chol = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Diagnostic("Laplace covariance is not positive definite".into()))?;
    let l = chol.l();
    let (psi, sigma2) = match fixed {
        Some(f) => {
            if f.streams.len() != streams.len() {
                return Err(Error::input("fixed GP configuration does not match the streams"));
            }
            f.streams
                .iter()
                .zip(streams)
                .map(|(g, s)| (g.psi, g.sigma2_d / s.mean_sigma2_eps()))
                .unzip()
        }
        None => (Vec::new(), Vec::new()),
    };
    let center = DVector::from_column_slice(&report.theta_hat);
    let samples = (0..draws)
        .map(|i| {
            let xi = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let theta = &center + &l * xi;
            ArchiveSample {
                chain: 0,
                generation: i,
                theta: theta.iter().copied().collect(),
                psi: psi.clone(),
                sigma2: sigma2.clone(),
                logp: f64::NAN,
            }
        })
        .collect();
    Ok(PosteriorArchive {
        scenario: if fixed.is_some() { Scenario::Gp } else { Scenario::Ignore },
        model: String::new(),
        parameter_names: model.parameter_names(),
        stream_names: streams.iter().map(|s| s.name.clone()).collect(),
        stream_noise: streams.iter().map(ObservationStream::mean_sigma2_eps).collect(),
        chains: 1,
        populations: 1,
        cycles: draws,
        burn_in: 0,
        thinning: 1,
        seed: 0,
        config_fingerprint: String::new(),
        samples,
    })
}
