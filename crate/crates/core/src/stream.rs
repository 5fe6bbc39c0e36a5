use crate::error::{Error, Result};
use crate::gp::Locations;

/// Observations of one quantity with known observation-error variances.
///
/// Records are kept sorted by location; model predictions handed to the
/// density functions must use the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationStream {
    pub name: String,
    pub locations: Locations,
    pub observations: Vec<f64>,
    pub sigma2_eps: Vec<f64>,
}

impl ObservationStream {
    /// Builds a stream, sorting records by location. `sigma2_eps` holds either
    /// one value for all records or one per record.
    pub fn new(
        name: impl Into<String>,
        locations: Vec<f64>,
        observations: Vec<f64>,
        sigma2_eps: Vec<f64>,
    ) -> Result<Self> {
        let name = name.into();
        let n = locations.len();
        if n == 0 {
            return Err(Error::input(format!("stream '{name}' has no records")));
        }
        if observations.len() != n {
            return Err(Error::input(format!(
                "stream '{name}': {n} locations but {} observations",
                observations.len()
            )));
        }
        let sigma2_eps = match sigma2_eps.len() {
            1 => vec![sigma2_eps[0]; n],
            k if k == n => sigma2_eps,
            k => {
                return Err(Error::input(format!(
                    "stream '{name}': expected 1 or {n} noise variances, got {k}"
                )))
            }
        };
        if let Some(v) = sigma2_eps.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::input(format!(
                "stream '{name}': noise variance must be positive, got {v}"
            )));
        }
        if let Some(v) = observations.iter().find(|v| !v.is_finite()) {
            return Err(Error::input(format!("stream '{name}': non-finite observation {v}")));
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| locations[a].total_cmp(&locations[b]));
        let locations = Locations::new(order.iter().map(|&i| locations[i]).collect())?;
        let observations = order.iter().map(|&i| observations[i]).collect();
        let sigma2_eps = order.iter().map(|&i| sigma2_eps[i]).collect();
        Ok(ObservationStream {
            name,
            locations,
            observations,
            sigma2_eps,
        })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Mean observation-error variance, the normalizer of the discrepancy variance.
    pub fn mean_sigma2_eps(&self) -> f64 {
        self.sigma2_eps.iter().sum::<f64>() / self.len() as f64
    }

    /// Model-data residuals `o - g`.
    pub fn residuals(&self, predictions: &[f64]) -> Vec<f64> {
        self.observations
            .iter()
            .zip(predictions)
            .map(|(o, g)| o - g)
            .collect()
    }

    /// `sum_i d_i^2 / sigma2_eps_i`.
    pub fn weighted_sse(&self, residuals: &[f64]) -> f64 {
        residuals
            .iter()
            .zip(&self.sigma2_eps)
            .map(|(d, s2)| d * d / s2)
            .sum()
    }
}
