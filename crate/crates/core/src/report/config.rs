//! Run configuration, read from TOML.

use serde::{Deserialize, Serialize};

use super::predictive::PredictiveOptions;
use crate::error::{Error, Result};
use crate::inference::{GammaPrior, InverseGammaPrior, Priors, SamplerConfig, Scenario};
use crate::models::{BasicExampleConfig, LinearGaussianConfig};
use crate::optimize::{BfgsOptions, SignalVarianceReading};
use crate::stream::ObservationStream;

/// Forward model of a run, with its synthetic-data settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelConfig {
    BasicExample(BasicExampleConfig),
    LinearGaussian(LinearGaussianConfig),
    /// A model supplied by library code; not runnable from a config file.
    External,
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::BasicExample(_) => "basic-example",
            ModelConfig::LinearGaussian(_) => "linear-gaussian",
            ModelConfig::External => "external",
        }
    }

    pub fn stream_names(&self) -> Vec<String> {
        match self {
            ModelConfig::BasicExample(_) => vec!["sparse".into(), "rich".into()],
            ModelConfig::LinearGaussian(_) => vec!["y".into()],
            ModelConfig::External => Vec::new(),
        }
    }

    /// Parameter box used when the config gives none.
    pub fn default_bounds(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            ModelConfig::BasicExample(_) => Some(vec![(0.0, 3.0), (0.0, 6.0)]),
            _ => None,
        }
    }
}

/// Correlation-length prior family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiPriorKind {
    /// Mean `r/3`, variance `r^2/3.2` for a stream spanning `r`.
    #[default]
    MomentMatched,
    /// Shape 1.14, rate 0.188 for every stream.
    LiteralRate,
    /// Shape 1.14, scale 0.188 for every stream.
    LiteralScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    /// Flat prior box per parameter; the model default applies when absent.
    pub theta_bounds: Option<Vec<(f64, f64)>>,
    pub psi: PsiPriorKind,
    pub sigma2_alpha: f64,
    pub sigma2_beta: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        let ig = InverseGammaPrior::default();
        PriorConfig {
            theta_bounds: None,
            psi: PsiPriorKind::default(),
            sigma2_alpha: ig.alpha,
            sigma2_beta: ig.beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    /// Starting point; defaults to the centre of the parameter box.
    pub theta0: Option<Vec<f64>>,
    pub signal_variance: SignalVarianceReading,
    pub bfgs: BfgsOptions,
    /// Laplace draws for the reported bands.
    pub laplace_draws: Option<usize>,
}

/// Everything a CLI run needs besides the data directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_scenario")]
    pub scenario: Scenario,
    pub model: ModelConfig,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub priors: PriorConfig,
    #[serde(default)]
    pub optimize: OptimizeConfig,
    #[serde(default)]
    pub predict: PredictiveOptions,
    /// Stream files relative to the data directory, one per model stream in
    /// model order; `<stream>.csv` by default.
    #[serde(default)]
    pub streams: Option<Vec<String>>,
}

fn default_scenario() -> Scenario {
    Scenario::Ignore
}

impl RunConfig {
    pub fn new(model: ModelConfig) -> Self {
        RunConfig {
            scenario: Scenario::Ignore,
            model,
            sampler: SamplerConfig::default(),
            priors: PriorConfig::default(),
            optimize: OptimizeConfig::default(),
            predict: PredictiveOptions::default(),
            streams: None,
        }
    }

    #[cfg(feature = "io")]
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[cfg(feature = "io")]
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn dimension(&self) -> Option<usize> {
        match &self.model {
            ModelConfig::BasicExample(_) => Some(2),
            ModelConfig::LinearGaussian(c) => Some(c.theta_true.len()),
            ModelConfig::External => None,
        }
    }

    pub fn theta_bounds(&self) -> Option<Vec<(f64, f64)>> {
        self.priors.theta_bounds.clone().or_else(|| self.model.default_bounds())
    }

    pub fn validate(&self) -> Result<()> {
        match &self.model {
            ModelConfig::BasicExample(c) => c.validate()?,
            ModelConfig::LinearGaussian(c) => {
                if c.theta_true.is_empty() || c.n < c.theta_true.len() || !(c.noise_sd > 0.0) {
                    return Err(Error::config("linear-gaussian needs n >= dimension >= 1 and noise_sd > 0"));
                }
            }
            ModelConfig::External => {}
        }
        if let Some(d) = self.dimension() {
            self.sampler.validate(d)?;
            let check = |what: &str, len: usize| {
                if len != d {
                    Err(Error::config(format!("{what} has {len} entries for {d} parameters")))
                } else {
                    Ok(())
                }
            };
            if let Some(b) = &self.priors.theta_bounds {
                check("priors.theta_bounds", b.len())?;
            }
            if let Some(t) = &self.optimize.theta0 {
                check("optimize.theta0", t.len())?;
            }
        }
        InverseGammaPrior::new(self.priors.sigma2_alpha, self.priors.sigma2_beta)?;
        self.predict.validate()?;
        let o = &self.optimize.bfgs;
        if !(o.gtol > 0.0 && o.ftol >= 0.0 && o.fd_step > 0.0 && o.max_iter > 0) {
            return Err(Error::config("optimize.bfgs needs gtol > 0, ftol >= 0, fd_step > 0, max_iter > 0"));
        }
        if let Some(s) = &self.streams {
            let expected = self.model.stream_names().len();
            if expected > 0 && s.len() != expected {
                return Err(Error::config(format!("streams lists {} files for {expected} streams", s.len())));
            }
        }
        Priors {
            psi: Vec::new(),
            sigma2: InverseGammaPrior::default(),
            theta_bounds: self.priors.theta_bounds.clone(),
        }
        .validate()
    }

    /// Priors for the given streams.
    pub fn priors(&self, streams: &[ObservationStream]) -> Result<Priors> {
        let mut p = Priors::for_streams(streams, self.theta_bounds())?;
        p.sigma2 = InverseGammaPrior::new(self.priors.sigma2_alpha, self.priors.sigma2_beta)?;
        match self.priors.psi {
            PsiPriorKind::MomentMatched => {}
            PsiPriorKind::LiteralRate => p.psi = vec![GammaPrior::literal_sparse_rate(); streams.len()],
            PsiPriorKind::LiteralScale => p.psi = vec![GammaPrior::literal_sparse_scale(); streams.len()],
        }
        Ok(p)
    }

    /// Starting point of the optimizer.
    pub fn theta0(&self) -> Result<Vec<f64>> {
        if let Some(t) = &self.optimize.theta0 {
            return Ok(t.clone());
        }
        let b = self
            .theta_bounds()
            .or_else(|| self.sampler.init_box.clone())
            .ok_or_else(|| Error::config("optimize.theta0 is required when the parameters are unbounded"))?;
        Ok(b.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect())
    }
}
