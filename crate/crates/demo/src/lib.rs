//! WebAssembly bindings for the browser demo in `www/`: conditional GP
//! draws through user-placed residuals, support selection along a line, and
//! the basic example fitted with and without a fixed discrepancy GP.

use gpdisc::gp::{
    conditional_discrepancy_with_noise, select_supporting_points_at, ConditionalSampler, KernelParams, Locations,
    SupportSelection,
};
use gpdisc::inference::stream_terms;
use gpdisc::models::{generate_synthetic_data, BasicExampleConfig, BasicExampleModel, ForwardModel};
use gpdisc::optimize::{
    bfgs_minimize, fixed_gp_config, BfgsOptions, FixedGpConfig, GpFixedObjective, IgnoreObjective,
    SignalVarianceReading,
};
use gpdisc::stream::ObservationStream;
use gpdisc::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

fn js(e: gpdisc::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Conditional draws on `grid` given residuals `z` observed at `x` with
/// noise variance `noise`. Returns `draws` rows of `grid.len()` values,
/// row-major, preceded by one row holding the conditional mean.
#[allow(clippy::too_many_arguments)]
pub fn conditional_draws(
    x: &[f64],
    z: &[f64],
    noise: f64,
    grid: &[f64],
    psi: f64,
    sigma2_d: f64,
    draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if x.len() != z.len() || x.is_empty() {
        return Err(gpdisc::Error::input("need matching, non-empty x and z"));
    }
    // tag points so that supports can be found after sorting
    let mut all: Vec<(f64, Option<usize>)> = x.iter().enumerate().map(|(i, v)| (*v, Some(i))).collect();
    all.extend(grid.iter().map(|v| (*v, None)));
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let locs = Locations::new(all.iter().map(|p| p.0).collect())?;
    let support_idx: Vec<usize> = all.iter().enumerate().filter(|(_, p)| p.1.is_some()).map(|(i, _)| i).collect();
    let z_s: Vec<f64> = all.iter().filter_map(|p| p.1.map(|i| z[i])).collect();
    let support = SupportSelection::from_indices(support_idx, all.len())?;
    let params = KernelParams::new(psi, sigma2_d)?;
    let est = conditional_discrepancy_with_noise(&z_s, &locs, &support, &params, &vec![noise; z_s.len()])?;
    let sampler = ConditionalSampler::new(&est, &locs, &support, &params)?;
    let on_grid: Vec<usize> = all.iter().enumerate().filter(|(_, p)| p.1.is_none()).map(|(i, _)| i).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<f64> = on_grid.iter().map(|&i| sampler.mean()[i]).collect();
    for _ in 0..draws {
        let d = sampler.draw(&mut rng);
        out.extend(on_grid.iter().map(|&i| d[i]));
    }
    Ok(out)
}

#[wasm_bindgen(js_name = conditionalDraws)]
#[allow(clippy::too_many_arguments)]
pub fn conditional_draws_js(
    x: Vec<f64>,
    z: Vec<f64>,
    noise: f64,
    grid: Vec<f64>,
    psi: f64,
    sigma2_d: f64,
    draws: usize,
    seed: u32,
) -> std::result::Result<Vec<f64>, JsError> {
    conditional_draws(&x, &z, noise, &grid, psi, sigma2_d, draws, seed as u64).map_err(js)
}

/// Indices of the supports chosen for `locations` (sorted internally) at
/// correlation length `psi` and grid offset `offset`.
pub fn select_supports(locations: &[f64], psi: f64, offset: f64) -> Result<Vec<u32>> {
    let locs = Locations::new(locations.to_vec())?;
    let sel = select_supporting_points_at(&locs, psi, offset)?;
    Ok(sel.support.iter().map(|&i| i as u32).collect())
}

#[wasm_bindgen(js_name = selectSupports)]
pub fn select_supports_js(locations: Vec<f64>, psi: f64, offset: f64) -> std::result::Result<Vec<u32>, JsError> {
    select_supports(&locations, psi, offset).map_err(js)
}

/// Synthetic basic-example data with both optimizer fits.
#[wasm_bindgen]
pub struct BasicExampleFit {
    streams: Vec<ObservationStream>,
    model: BasicExampleModel,
    truth: Vec<Vec<f64>>,
    fixed: FixedGpConfig,
    ignore_theta: Vec<f64>,
    gp_theta: Vec<f64>,
}

impl BasicExampleFit {
    pub fn compute(seed: u64, n_rich: usize, variance_reading: bool) -> Result<Self> {
        let config = BasicExampleConfig {
            n_rich,
            seed,
            ..Default::default()
        };
        let data = generate_synthetic_data(&config, &mut ChaCha8Rng::seed_from_u64(seed))?;
        let streams = data.streams()?;
        let model = data.model();
        let reading = if variance_reading {
            SignalVarianceReading::Variance
        } else {
            SignalVarianceReading::StandardDeviation
        };
        let fixed = fixed_gp_config(&streams, reading)?;
        let opts = BfgsOptions::default();
        let theta0 = [1.5, 3.0];
        let ignore_theta = bfgs_minimize(&IgnoreObjective::new(&model, &streams)?, &theta0, &opts)?.theta_hat;
        let gp_theta = bfgs_minimize(&GpFixedObjective::new(&model, &streams, &fixed)?, &theta0, &opts)?.theta_hat;
        Ok(BasicExampleFit {
            truth: data.sorted_truth(),
            streams,
            model,
            fixed,
            ignore_theta,
            gp_theta,
        })
    }

    fn stream(&self, k: usize) -> Result<&ObservationStream> {
        self.streams
            .get(k)
            .ok_or_else(|| gpdisc::Error::input(format!("no stream {k}")))
    }

    pub fn prediction(&self, k: usize, gp: bool) -> Result<Vec<f64>> {
        let theta = if gp { &self.gp_theta } else { &self.ignore_theta };
        Ok(self.model.evaluate(theta)?.swap_remove(k))
    }

    /// `g + delta_hat` at the gp-fixed optimum.
    pub fn process(&self, k: usize) -> Result<Vec<f64>> {
        let s = self.stream(k)?;
        let g = self.prediction(k, true)?;
        let f = &self.fixed.streams[k];
        let terms = stream_terms(s, &g, &f.kernel()?, &f.support)?;
        let delta = terms.estimate.delta_full(&f.support);
        Ok(g.iter().zip(delta).map(|(a, b)| a + b).collect())
    }

    /// Root-mean-square misfit of a fit to stream `k`, in units of the
    /// observation noise sd.
    pub fn rms(&self, k: usize, gp: bool) -> Result<f64> {
        let s = self.stream(k)?;
        let p = if gp { self.process(k)? } else { self.prediction(k, false)? };
        let ms = s.weighted_sse(&s.residuals(&p)) / s.len() as f64;
        Ok(ms.sqrt())
    }
}

#[wasm_bindgen]
impl BasicExampleFit {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, n_rich: usize, variance_reading: bool) -> std::result::Result<BasicExampleFit, JsError> {
        Self::compute(seed as u64, n_rich, variance_reading).map_err(js)
    }

    pub fn locations(&self, k: usize) -> std::result::Result<Vec<f64>, JsError> {
        Ok(self.stream(k).map_err(js)?.locations.as_slice().to_vec())
    }

    pub fn observations(&self, k: usize) -> std::result::Result<Vec<f64>, JsError> {
        Ok(self.stream(k).map_err(js)?.observations.clone())
    }

    pub fn truth(&self, k: usize) -> Vec<f64> {
        self.truth.get(k).cloned().unwrap_or_default()
    }

    /// `g(theta_hat)` of the ignore fit (`gp = false`) or the gp-fixed fit.
    #[wasm_bindgen(js_name = modelPrediction)]
    pub fn model_prediction(&self, k: usize, gp: bool) -> std::result::Result<Vec<f64>, JsError> {
        self.prediction(k, gp).map_err(js)
    }

    #[wasm_bindgen(js_name = processPrediction)]
    pub fn process_prediction(&self, k: usize) -> std::result::Result<Vec<f64>, JsError> {
        self.process(k).map_err(js)
    }

    #[wasm_bindgen(js_name = rmsMisfit)]
    pub fn rms_misfit(&self, k: usize, gp: bool) -> std::result::Result<f64, JsError> {
        self.rms(k, gp).map_err(js)
    }

    #[wasm_bindgen(js_name = ignoreTheta)]
    pub fn ignore_theta(&self) -> Vec<f64> {
        self.ignore_theta.clone()
    }

    #[wasm_bindgen(js_name = gpTheta)]
    pub fn gp_theta(&self) -> Vec<f64> {
        self.gp_theta.clone()
    }

    /// Indices of the fixed supports of stream `k`.
    pub fn supports(&self, k: usize) -> Vec<u32> {
        self.fixed
            .streams
            .get(k)
            .map(|f| f.support.support.iter().map(|&i| i as u32).collect())
            .unwrap_or_default()
    }
}
