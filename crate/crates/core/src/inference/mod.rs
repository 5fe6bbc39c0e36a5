//! Posterior sampling of model parameters with and without GP discrepancy.

mod archive;
mod demc;
mod density;
mod diagnostics;
mod gibbs;
mod priors;
mod sampler;

pub use archive::{ArchiveSample, PosteriorArchive, Scenario};
pub use demc::{default_gamma, demc_propose, draw_gamma, metropolis_accept, JITTER_RELATIVE, MODE_JUMP_PROBABILITY};
pub use density::{
    log_conditional_psi, log_conditional_psi_at, log_density_gp, log_density_ignore, stream_terms, GpHyperState,
    PsiConditional, StreamTerms,
};
pub use diagnostics::{gelman_rubin, potential_scale_reduction, MIN_SAMPLES_PER_CHAIN};
pub use gibbs::{draw_inverse_gamma, gibbs_sigma2, sigma2_posterior};
pub use priors::{GammaPrior, InverseGammaPrior, Priors};
pub use sampler::{fingerprint, run_sampler, HISTORY_INTERVAL, ChainState, SamplerConfig, StreamState};
