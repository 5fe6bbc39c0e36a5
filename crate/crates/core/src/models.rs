//! Deterministic forward models: the interface, the two-stream basic
//! example with its synthetic data generator, and a linear-Gaussian model
//! with a closed-form posterior for validating the sampler.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::ObservationStream;

/// A deterministic model producing one prediction vector per data stream.
///
/// Predictions must be ordered like the records of the corresponding
/// [`ObservationStream`] (ascending location).
pub trait ForwardModel: Send + Sync {
    fn parameter_names(&self) -> Vec<String>;

    fn stream_names(&self) -> Vec<String>;

    fn evaluate(&self, theta: &[f64]) -> Result<Vec<Vec<f64>>>;

    /// Per-stream Jacobians `d g_k / d theta` (n_k x d), when available
    /// analytically.
    fn jacobian(&self, _theta: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> {
        None
    }

    fn dimension(&self) -> usize {
        self.parameter_names().len()
    }
}

/// Covariates of the basic example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicCovariates {
    pub x_sparse: Vec<f64>,
    pub x_rich: Vec<f64>,
    /// First sparse covariate in draw order.
    pub x1_sparse: f64,
    /// Mean of the rich covariates.
    pub x_rich_mean: f64,
}

impl BasicCovariates {
    pub fn new(x_sparse: Vec<f64>, x_rich: Vec<f64>) -> Result<Self> {
        if x_sparse.is_empty() || x_rich.is_empty() {
            return Err(Error::input("basic example needs sparse and rich covariates"));
        }
        let x1_sparse = x_sparse[0];
        let x_rich_mean = x_rich.iter().sum::<f64>() / x_rich.len() as f64;
        Ok(BasicCovariates {
            x_sparse,
            x_rich,
            x1_sparse,
            x_rich_mean,
        })
    }
}

/// Predictions of the basic example at `(a, b)` with rich-stream bias `c`:
/// `sparse = a x_sparse + b mean(x_rich) / 10`,
/// `rich = a x1_sparse + b (x_rich - c)`.
pub fn basic_example_predict(theta: &[f64], cov: &BasicCovariates, c: f64) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = (theta[0], theta[1]);
    let sparse = cov
        .x_sparse
        .iter()
        .map(|x| a * x + b * cov.x_rich_mean / 10.0)
        .collect();
    let rich = cov
        .x_rich
        .iter()
        .map(|x| a * cov.x1_sparse + b * (x - c))
        .collect();
    (sparse, rich)
}

/// The basic example as a [`ForwardModel`] with streams `sparse` and `rich`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicExampleModel {
    covariates: BasicCovariates,
    c: f64,
}

impl BasicExampleModel {
    /// Covariates are sorted so that predictions line up with the streams;
    /// `x1_sparse` and `x_rich_mean` are kept as given.
    pub fn new(covariates: &BasicCovariates, c: f64) -> Self {
        let mut sorted = covariates.clone();
        sorted.x_sparse.sort_by(f64::total_cmp);
        sorted.x_rich.sort_by(f64::total_cmp);
        BasicExampleModel { covariates: sorted, c }
    }

    pub fn covariates(&self) -> &BasicCovariates {
        &self.covariates
    }

    pub fn bias(&self) -> f64 {
        self.c
    }
}

impl ForwardModel for BasicExampleModel {
    fn parameter_names(&self) -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    fn stream_names(&self) -> Vec<String> {
        vec!["sparse".into(), "rich".into()]
    }

    fn evaluate(&self, theta: &[f64]) -> Result<Vec<Vec<f64>>> {
        if theta.len() != 2 {
            return Err(Error::Model(format!("expected 2 parameters, got {}", theta.len())));
        }
        let (s, r) = basic_example_predict(theta, &self.covariates, self.c);
        Ok(vec![s, r])
    }

    fn jacobian(&self, _theta: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> {
        let cov = &self.covariates;
        let js = DMatrix::from_fn(cov.x_sparse.len(), 2, |i, j| {
            if j == 0 {
                cov.x_sparse[i]
            } else {
                cov.x_rich_mean / 10.0
            }
        });
        let jr = DMatrix::from_fn(cov.x_rich.len(), 2, |i, j| {
            if j == 0 {
                cov.x1_sparse
            } else {
                cov.x_rich[i] - self.c
            }
        });
        Some(Ok(vec![js, jr]))
    }
}

/// Settings of the synthetic basic-example experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasicExampleConfig {
    pub n_rich: usize,
    pub n_sparse: usize,
    pub sparse_range: (f64, f64),
    pub rich_range: (f64, f64),
    pub a_true: f64,
    pub b_true: f64,
    pub c_true: f64,
    /// Bias used by the (deliberately wrong) inversion model.
    pub c_model: f64,
    /// Noise sd as a fraction of the mean noise-free sparse observation.
    pub noise_frac_sparse: f64,
    pub noise_frac_rich: f64,
    pub seed: u64,
}

impl Default for BasicExampleConfig {
    fn default() -> Self {
        BasicExampleConfig {
            n_rich: 1000,
            n_sparse: 10,
            sparse_range: (0.5, 1.5),
            rich_range: (0.7, 1.0),
            a_true: 1.0,
            b_true: 2.0,
            c_true: 0.3,
            c_model: 0.1,
            noise_frac_sparse: 0.04,
            noise_frac_rich: 0.03,
            seed: 42,
        }
    }
}

impl BasicExampleConfig {
    pub fn validate(&self) -> Result<()> {
        let ranges_ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.0 < r.1;
        if self.n_rich == 0 || self.n_sparse == 0 {
            return Err(Error::config("stream sizes must be positive"));
        }
        if !ranges_ok(self.sparse_range) || !ranges_ok(self.rich_range) {
            return Err(Error::config("covariate ranges must be finite with lower < upper"));
        }
        if !(self.noise_frac_sparse >= 0.0 && self.noise_frac_rich >= 0.0) {
            return Err(Error::config("noise fractions must be nonnegative"));
        }
        Ok(())
    }
}

/// Generated observations together with the noise-free truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticData {
    pub config: BasicExampleConfig,
    /// Covariates in draw order.
    pub covariates: BasicCovariates,
    pub truth_sparse: Vec<f64>,
    pub truth_rich: Vec<f64>,
    pub obs_sparse: Vec<f64>,
    pub obs_rich: Vec<f64>,
    pub sd_sparse: f64,
    pub sd_rich: f64,
}

impl SyntheticData {
    /// Streams `sparse` and `rich`, sorted by covariate, with the generating
    /// noise variances.
    pub fn streams(&self) -> Result<Vec<ObservationStream>> {
        Ok(vec![
            ObservationStream::new(
                "sparse",
                self.covariates.x_sparse.clone(),
                self.obs_sparse.clone(),
                vec![self.sd_sparse * self.sd_sparse],
            )?,
            ObservationStream::new(
                "rich",
                self.covariates.x_rich.clone(),
                self.obs_rich.clone(),
                vec![self.sd_rich * self.sd_rich],
            )?,
        ])
    }

    /// The inversion model, using the configured (biased) `c_model`.
    pub fn model(&self) -> BasicExampleModel {
        BasicExampleModel::new(&self.covariates, self.config.c_model)
    }

    /// Noise-free truth per stream, sorted like [`SyntheticData::streams`].
    pub fn sorted_truth(&self) -> Vec<Vec<f64>> {
        let sort = |x: &[f64], v: &[f64]| {
            let mut idx: Vec<usize> = (0..x.len()).collect();
            idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
            idx.iter().map(|&i| v[i]).collect::<Vec<f64>>()
        };
        vec![
            sort(&self.covariates.x_sparse, &self.truth_sparse),
            sort(&self.covariates.x_rich, &self.truth_rich),
        ]
    }
}

/// Draws covariates, evaluates the true process and adds Gaussian noise.
///
/// `mean(x_rich)` in the sparse equation is the sample mean of the drawn
/// covariates.
pub fn generate_synthetic_data<R: Rng + ?Sized>(
    config: &BasicExampleConfig,
    rng: &mut R,
) -> Result<SyntheticData> {
    config.validate()?;
    let us = Uniform::new(config.sparse_range.0, config.sparse_range.1)
        .map_err(|e| Error::config(e.to_string()))?;
    let ur = Uniform::new(config.rich_range.0, config.rich_range.1)
        .map_err(|e| Error::config(e.to_string()))?;
    let x_sparse: Vec<f64> = (0..config.n_sparse).map(|_| us.sample(rng)).collect();
    let x_rich: Vec<f64> = (0..config.n_rich).map(|_| ur.sample(rng)).collect();
    let covariates = BasicCovariates::new(x_sparse, x_rich)?;

    let (truth_sparse, truth_rich) =
        basic_example_predict(&[config.a_true, config.b_true], &covariates, config.c_true);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let sd_sparse = config.noise_frac_sparse * mean(&truth_sparse);
    let sd_rich = config.noise_frac_rich * mean(&truth_rich);

    let mut noisy = |truth: &[f64], sd: f64| -> Vec<f64> {
        truth
            .iter()
            .map(|t| t + sd * rng.sample::<f64, _>(StandardNormal))
            .collect()
    };
    let obs_sparse = noisy(&truth_sparse, sd_sparse);
    let obs_rich = noisy(&truth_rich, sd_rich);

    Ok(SyntheticData {
        config: config.clone(),
        covariates,
        truth_sparse,
        truth_rich,
        obs_sparse,
        obs_rich,
        sd_sparse,
        sd_rich,
    })
}

/// `g(theta) = X theta` with a single stream named `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianModel {
    design: DMatrix<f64>,
}

/// Builds the linear test model; the design must have full column rank.
pub fn linear_gaussian_test_model(design: DMatrix<f64>) -> Result<LinearGaussianModel> {
    let (n, d) = design.shape();
    if d == 0 || n < d {
        return Err(Error::config(format!("design of shape {n}x{d} cannot have full column rank")));
    }
    if design.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("design contains non-finite entries"));
    }
    let svd = design.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-12 * n.max(d) as f64;
    if svd.rank(tol) < d {
        return Err(Error::config("design matrix is rank deficient"));
    }
    Ok(LinearGaussianModel { design })
}

impl LinearGaussianModel {
    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    /// Posterior mean and covariance under a flat prior and independent
    /// Gaussian noise: `cov = (X^T W X)^{-1}`, `mean = cov X^T W y`.
    pub fn closed_form_posterior(&self, stream: &ObservationStream) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let x = &self.design;
        let w = DVector::from_iterator(stream.len(), stream.sigma2_eps.iter().map(|s| 1.0 / s));
        let xtw = DMatrix::from_fn(x.ncols(), x.nrows(), |i, j| x[(j, i)] * w[j]);
        let info = &xtw * x;
        let chol = info
            .cholesky()
            .ok_or_else(|| Error::config("information matrix is not positive definite"))?;
        let cov = chol.inverse();
        let mean = &cov * (&xtw * DVector::from_column_slice(&stream.observations));
        Ok((mean, cov))
    }
}

impl ForwardModel for LinearGaussianModel {
    fn parameter_names(&self) -> Vec<String> {
        (0..self.design.ncols()).map(|i| format!("theta{i}")).collect()
    }

    fn stream_names(&self) -> Vec<String> {
        vec!["y".into()]
    }

    fn evaluate(&self, theta: &[f64]) -> Result<Vec<Vec<f64>>> {
        if theta.len() != self.design.ncols() {
            return Err(Error::Model(format!(
                "expected {} parameters, got {}",
                self.design.ncols(),
                theta.len()
            )));
        }
        let g = &self.design * DVector::from_column_slice(theta);
        Ok(vec![g.iter().copied().collect()])
    }

    fn jacobian(&self, _theta: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> {
        Some(Ok(vec![self.design.clone()]))
    }
}

/// Settings for a synthetic linear-Gaussian data set: an intercept column and
/// `dimension - 1` standard-normal covariate columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinearGaussianConfig {
    pub n: usize,
    pub theta_true: Vec<f64>,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for LinearGaussianConfig {
    fn default() -> Self {
        LinearGaussianConfig {
            n: 50,
            theta_true: vec![1.0, -0.5],
            noise_sd: 0.5,
            seed: 42,
        }
    }
}

/// Design (rows in location order), stream `y` with locations `0..1`, and the
/// noise-free truth.
pub fn generate_linear_gaussian<R: Rng + ?Sized>(
    config: &LinearGaussianConfig,
    rng: &mut R,
) -> Result<(LinearGaussianModel, ObservationStream, Vec<f64>)> {
    let d = config.theta_true.len();
    if d == 0 || config.n < d || !(config.noise_sd > 0.0) {
        return Err(Error::config("linear-gaussian generator needs n >= dimension >= 1 and noise_sd > 0"));
    }
    let design = DMatrix::from_fn(config.n, d, |_, j| {
        if j == 0 {
            1.0
        } else {
            rng.sample::<f64, _>(StandardNormal)
        }
    });
    let model = linear_gaussian_test_model(design)?;
    let truth = model.evaluate(&config.theta_true)?.remove(0);
    let noise = Normal::new(0.0, config.noise_sd).map_err(|e| Error::config(e.to_string()))?;
    let obs: Vec<f64> = truth.iter().map(|t| t + noise.sample(rng)).collect();
    let locations = (0..config.n)
        .map(|i| if config.n > 1 { i as f64 / (config.n - 1) as f64 } else { 0.0 })
        .collect();
    let stream = ObservationStream::new("y", locations, obs, vec![config.noise_sd * config.noise_sd])?;
    Ok((model, stream, truth))
}
