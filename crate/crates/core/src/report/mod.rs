//! Posterior summaries, predictive bands, run configuration and the
//! columnar text formats used for persistence.

mod config;
#[cfg(feature = "io")]
pub mod io;
mod predictive;
mod quantile;
mod summary;

pub use config::{ModelConfig, OptimizeConfig, PriorConfig, PsiPriorKind, RunConfig};
pub use predictive::{laplace_archive, predictive_posterior, PredictiveBand, PredictiveOptions, QuantileBand};
pub use quantile::{quantile_sorted, quantiles, DEFAULT_PROBABILITIES};
pub use summary::{
    default_discrepancy_summary, discrepancy_summary, parameter_summaries, DiscrepancySummary, ParameterSummary,
    StreamDiscrepancy, StreamRatio,
};
