use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::ObservationStream;

/// Gamma density in shape/rate form, used (truncated) for the correlation length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl GammaPrior {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
            return Err(Error::config(format!(
                "gamma prior needs positive shape and rate, got ({shape}, {rate})"
            )));
        }
        Ok(GammaPrior { shape, rate })
    }

    /// Matches the given mean and variance.
    pub fn from_moments(mean: f64, variance: f64) -> Result<Self> {
        if !(mean > 0.0 && variance > 0.0) {
            return Err(Error::config("gamma moments must be positive"));
        }
        GammaPrior::new(mean * mean / variance, mean / variance)
    }

    /// Mean `r/3` and variance `r^2/3.2` for a stream whose locations span `r`.
    pub fn for_range(range: f64) -> Result<Self> {
        GammaPrior::from_moments(range / 3.0, range * range / 3.2)
    }

    /// The literal pair (1.14, 0.188) read as shape and rate.
    pub fn literal_sparse_rate() -> Self {
        GammaPrior { shape: 1.14, rate: 0.188 }
    }

    /// The literal pair (1.14, 0.188) read as shape and scale.
    pub fn literal_sparse_scale() -> Self {
        GammaPrior { shape: 1.14, rate: 1.0 / 0.188 }
    }

    /// `(shape - 1) ln x - rate x`, normalizing constant omitted.
    pub fn ln_density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (self.shape - 1.0) * x.ln() - self.rate * x
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }
}

/// Inverse-gamma prior of the normalized discrepancy variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseGammaPrior {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for InverseGammaPrior {
    fn default() -> Self {
        InverseGammaPrior { alpha: 1.005, beta: 0.1 }
    }
}

impl InverseGammaPrior {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::config(format!(
                "inverse-gamma prior needs positive parameters, got ({alpha}, {beta})"
            )));
        }
        Ok(InverseGammaPrior { alpha, beta })
    }

    /// `beta / (alpha - 1)`, infinite for `alpha <= 1`.
    pub fn mean(&self) -> f64 {
        if self.alpha > 1.0 {
            self.beta / (self.alpha - 1.0)
        } else {
            f64::INFINITY
        }
    }

    pub fn mode(&self) -> f64 {
        self.beta / (self.alpha + 1.0)
    }
}

/// Prior settings of an inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct Priors {
    /// Correlation-length prior per stream.
    pub psi: Vec<GammaPrior>,
    pub sigma2: InverseGammaPrior,
    /// Optional box bounds of the flat parameter prior.
    pub theta_bounds: Option<Vec<(f64, f64)>>,
}

impl Priors {
    /// Moment-matched correlation-length priors per stream and the default
    /// inverse-gamma prior.
    pub fn for_streams(streams: &[ObservationStream], theta_bounds: Option<Vec<(f64, f64)>>) -> Result<Self> {
        let psi = streams
            .iter()
            .map(|s| {
                let r = s.locations.range();
                if r > 0.0 {
                    GammaPrior::for_range(r)
                } else {
                    // a single location never enters the GP blocks
                    GammaPrior::new(1.0, 1.0)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let p = Priors {
            psi,
            sigma2: InverseGammaPrior::default(),
            theta_bounds,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(bounds) = &self.theta_bounds {
            for (i, (lo, hi)) in bounds.iter().enumerate() {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::config(format!("invalid bounds for parameter {i}: ({lo}, {hi})")));
                }
            }
        }
        Ok(())
    }

    /// Flat log prior: 0 inside the box (or everywhere), `-inf` outside.
    pub fn ln_theta(&self, theta: &[f64]) -> f64 {
        if theta.iter().any(|v| !v.is_finite()) {
            return f64::NEG_INFINITY;
        }
        match &self.theta_bounds {
            Some(b) if theta.iter().zip(b).any(|(v, (lo, hi))| v < lo || v > hi) => f64::NEG_INFINITY,
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_matching_round_trips() {
        let g = GammaPrior::for_range(1.0).unwrap();
        assert!((g.mean() - 1.0 / 3.0).abs() < 1e-14);
        assert!((g.variance() - 1.0 / 3.2).abs() < 1e-14);
    }

    #[test]
    fn literal_pair_does_not_match_the_moments() {
        for g in [GammaPrior::literal_sparse_rate(), GammaPrior::literal_sparse_scale()] {
            assert!((g.mean() - 1.0 / 3.0).abs() > 0.1);
        }
    }

    #[test]
    fn ln_density_formula() {
        let g = GammaPrior::literal_sparse_rate();
        let psi = 0.4;
        assert!((g.ln_density(psi) - (0.14 * psi.ln() - 0.188 * psi)).abs() < 1e-15);
        assert_eq!(g.ln_density(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn inverse_gamma_default_mean_is_twenty() {
        let ig = InverseGammaPrior::default();
        assert!((ig.mean() - 20.0).abs() < 1e-9);
        assert!((ig.mode() - 0.1 / 2.005).abs() < 1e-15);
    }

    #[test]
    fn flat_prior_with_box() {
        let p = Priors {
            psi: vec![],
            sigma2: InverseGammaPrior::default(),
            theta_bounds: Some(vec![(0.0, 1.0)]),
        };
        assert_eq!(p.ln_theta(&[0.5]), 0.0);
        assert_eq!(p.ln_theta(&[1.5]), f64::NEG_INFINITY);
    }
}
