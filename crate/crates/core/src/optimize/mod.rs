//! Gradient-based maximization of the parameter densities, with a Laplace
//! approximation of the posterior at the optimum.

mod bfgs;
mod objective;

pub use bfgs::{
    bfgs_minimize, central_gradient, finite_difference_hessian, BfgsOptions, Objective, OptimumReport,
    DEFAULT_FD_STEP,
};
pub use objective::{
    equidistant_supports, fixed_gp_config, objective_gp_fixed, objective_ignore, FixedGpConfig, FixedStreamGp,
    GpFixedObjective, IgnoreObjective, SignalVarianceReading, FIXED_SUPPORTS,
};
