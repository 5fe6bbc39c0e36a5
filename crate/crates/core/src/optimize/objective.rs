//! Negative log densities for gradient-based fitting, with hyperparameters
//! and supporting locations frozen.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::bfgs::{central_gradient, Objective, DEFAULT_FD_STEP};
use crate::error::{Error, Result};
use crate::gp::{kernel_matrix, KernelParams, Locations, SupportSelection};
use crate::inference::stream_terms;
use crate::linalg::spd_factor;
use crate::models::ForwardModel;
use crate::stream::ObservationStream;

/// Number of equidistant supporting points of the fixed GP.
pub const FIXED_SUPPORTS: usize = 4;

/// How "signal variance based on 1.5 times the observation uncertainty" is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalVarianceReading {
    /// `sigma_d = 1.5 sigma_eps`, so `sigma2_d = 2.25 mean(sigma2_eps)`.
    #[default]
    StandardDeviation,
    /// `sigma2_d = 1.5 mean(sigma2_eps)`.
    Variance,
}

impl SignalVarianceReading {
    pub fn factor(self) -> f64 {
        match self {
            SignalVarianceReading::StandardDeviation => 1.5 * 1.5,
            SignalVarianceReading::Variance => 1.5,
        }
    }
}

/// Frozen GP settings of one stream.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedStreamGp {
    pub support: SupportSelection,
    pub psi: f64,
    pub sigma2_d: f64,
}

impl FixedStreamGp {
    pub fn kernel(&self) -> Result<KernelParams> {
        KernelParams::new(self.psi, self.sigma2_d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedGpConfig {
    pub streams: Vec<FixedStreamGp>,
}

/// Four supports nearest to equidistant nodes over each stream's range,
/// `psi = range / 3` and a signal variance scaled from the mean noise.
pub fn fixed_gp_config(streams: &[ObservationStream], reading: SignalVarianceReading) -> Result<FixedGpConfig> {
    let streams = streams
        .iter()
        .map(|s| {
            let support = equidistant_supports(&s.locations, FIXED_SUPPORTS)?;
            let range = s.locations.range();
            let psi = if range > 0.0 { range / 3.0 } else { 1.0 };
            Ok(FixedStreamGp {
                support,
                psi,
                sigma2_d: reading.factor() * s.mean_sigma2_eps(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FixedGpConfig { streams })
}

/// Observations nearest to `count` equidistant nodes spanning the range. A
/// node whose nearest observation is taken already moves on to the next
/// unused one. Streams with at most `count` records use all of them.
pub fn equidistant_supports(locs: &Locations, count: usize) -> Result<SupportSelection> {
    let n = locs.len();
    if count < 2 {
        return Err(Error::config("need at least 2 equidistant supports"));
    }
    if n <= count {
        return SupportSelection::from_indices((0..n).collect(), n);
    }
    let t = locs.as_slice();
    let step = locs.range() / (count - 1) as f64;
    let mut used = vec![false; n];
    let mut picked = Vec::with_capacity(count);
    for j in 0..count {
        let node = locs.min() + j as f64 * step;
        let nearest = (0..n)
            .min_by(|&a, &b| (t[a] - node).abs().total_cmp(&(t[b] - node).abs()))
            .expect("non-empty");
        let idx = (nearest..n).chain(0..nearest).find(|&i| !used[i]).expect("n > count");
        used[idx] = true;
        picked.push(idx);
    }
    let mut sel = SupportSelection::from_indices(picked, n)?;
    sel.spacing = step;
    Ok(sel)
}

fn check_streams(model: &dyn ForwardModel, streams: &[ObservationStream]) -> Result<()> {
    if model.stream_names().len() != streams.len() {
        return Err(Error::config(format!(
            "model expects {} streams, got {}",
            model.stream_names().len(),
            streams.len()
        )));
    }
    Ok(())
}

/// `1/2 sum_k S_k(o_k | theta)`, the negative log density ignoring discrepancy.
pub fn objective_ignore(theta: &[f64], streams: &[ObservationStream], model: &dyn ForwardModel) -> Result<f64> {
    let g = model.evaluate(theta)?;
    Ok(streams
        .iter()
        .zip(&g)
        .map(|(s, gk)| 0.5 * s.weighted_sse(&s.residuals(gk)))
        .sum())
}

/// Negative GP-scenario log density with frozen supports and hyperparameters.
pub fn objective_gp_fixed(
    theta: &[f64],
    streams: &[ObservationStream],
    model: &dyn ForwardModel,
    config: &FixedGpConfig,
) -> Result<f64> {
    if config.streams.len() != streams.len() {
        return Err(Error::config("fixed GP settings do not match the streams"));
    }
    let g = model.evaluate(theta)?;
    let mut total = 0.0;
    for ((s, gk), fixed) in streams.iter().zip(&g).zip(&config.streams) {
        let t = stream_terms(s, gk, &fixed.kernel()?, &fixed.support)?;
        total -= t.data + t.penalty;
    }
    Ok(total)
}

fn chain_rule(model: &dyn ForwardModel, theta: &[f64], dz: &[DVector<f64>]) -> Option<Result<Vec<f64>>> {
    let jac = match model.jacobian(theta)? {
        Ok(j) => j,
        Err(e) => return Some(Err(e)),
    };
    let mut grad = DVector::zeros(theta.len());
    for (j, d) in jac.iter().zip(dz) {
        grad -= j.transpose() * d;
    }
    Some(Ok(grad.iter().copied().collect()))
}

/// [`objective_ignore`] as an [`Objective`]; analytic gradient when the
/// model provides a Jacobian.
pub struct IgnoreObjective<'a> {
    pub model: &'a dyn ForwardModel,
    pub streams: &'a [ObservationStream],
}

impl<'a> IgnoreObjective<'a> {
    pub fn new(model: &'a dyn ForwardModel, streams: &'a [ObservationStream]) -> Result<Self> {
        check_streams(model, streams)?;
        Ok(IgnoreObjective { model, streams })
    }
}

impl Objective for IgnoreObjective<'_> {
    fn dimension(&self) -> usize {
        self.model.dimension()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        objective_ignore(x, self.streams, self.model)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let g = self.model.evaluate(x)?;
        let dz: Vec<DVector<f64>> = self
            .streams
            .iter()
            .zip(&g)
            .map(|(s, gk)| {
                DVector::from_iterator(
                    s.len(),
                    s.residuals(gk).iter().zip(&s.sigma2_eps).map(|(r, v)| r / v),
                )
            })
            .collect();
        match chain_rule(self.model, x, &dz) {
            Some(r) => r,
            None => central_gradient(|y| self.value(y), x, DEFAULT_FD_STEP),
        }
    }
}

/// [`objective_gp_fixed`] as an [`Objective`].
pub struct GpFixedObjective<'a> {
    pub model: &'a dyn ForwardModel,
    pub streams: &'a [ObservationStream],
    pub config: &'a FixedGpConfig,
}

impl<'a> GpFixedObjective<'a> {
    pub fn new(model: &'a dyn ForwardModel, streams: &'a [ObservationStream], config: &'a FixedGpConfig) -> Result<Self> {
        check_streams(model, streams)?;
        if config.streams.len() != streams.len() {
            return Err(Error::config("fixed GP settings do not match the streams"));
        }
        Ok(GpFixedObjective { model, streams, config })
    }

    /// Derivative of one stream's negative log density with respect to its
    /// residual vector `z = o - g`:
    /// `W d - S^T K_z^{-1} K_st W d + S^T K_z^{-1} delta_s`.
    fn residual_gradient(&self, s: &ObservationStream, gk: &[f64], fixed: &FixedStreamGp) -> Result<DVector<f64>> {
        let params = fixed.kernel()?;
        let t = stream_terms(s, gk, &params, &fixed.support)?;
        let z = s.residuals(gk);
        let delta = t.estimate.delta_full(&fixed.support);
        let wd = DVector::from_iterator(
            s.len(),
            z.iter().zip(&delta).zip(&s.sigma2_eps).map(|((zi, di), v)| (zi - di) / v),
        );
        if params.sigma2_d == 0.0 {
            return Ok(wd);
        }
        let locs = s.locations.as_slice();
        let s_locs = s.locations.subset(&fixed.support.support);
        let k_st: DMatrix<f64> = kernel_matrix(&s_locs, locs, &params)?;
        let fz = spd_factor(&t.estimate.k_z, params.sigma2_d).ok_or(Error::Singular {
            what: "K_z",
            psi: params.psi,
            spacing: fixed.support.mean_spacing(&s.locations),
        })?;
        let v = fz.solve(&(k_st * &wd)) - fz.solve(&t.estimate.delta_s);
        let mut out = wd;
        for (j, &i) in fixed.support.support.iter().enumerate() {
            out[i] -= v[j];
        }
        Ok(out)
    }
}

impl Objective for GpFixedObjective<'_> {
    fn dimension(&self) -> usize {
        self.model.dimension()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        objective_gp_fixed(x, self.streams, self.model, self.config)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let g = self.model.evaluate(x)?;
        let dz = self
            .streams
            .iter()
            .zip(&g)
            .zip(&self.config.streams)
            .map(|((s, gk), fixed)| self.residual_gradient(s, gk, fixed))
            .collect::<Result<Vec<_>>>()?;
        match chain_rule(self.model, x, &dz) {
            Some(r) => r,
            None => central_gradient(|y| self.value(y), x, DEFAULT_FD_STEP),
        }
    }
}
