//! Conditional expectation of the discrepancy given residuals at supports,
//! the associated penalty, and draws from the conditional GP.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{kernel_matrix, KernelParams, Locations, SupportSelection};
use crate::error::{Error, Result};
use crate::linalg::{pivoted_cholesky, spd_factor};

/// Expected discrepancy at supporting and remaining locations.
#[derive(Debug, Clone)]
pub struct DiscrepancyEstimate {
    pub delta_s: DVector<f64>,
    pub delta_r: DVector<f64>,
    /// `delta_s^T K_ss^{-1} delta_s`.
    pub penalty_quadform: f64,
    pub k_ss: DMatrix<f64>,
    /// `K_ss` plus observation-noise variance on the diagonal.
    pub k_z: DMatrix<f64>,
    /// `K_z^{-1} z_s`.
    pub weights: DVector<f64>,
}

impl DiscrepancyEstimate {
    /// Expected discrepancy in location order.
    pub fn delta_full(&self, support: &SupportSelection) -> Vec<f64> {
        support.merge(self.delta_s.as_slice(), self.delta_r.as_slice())
    }

    /// Zero discrepancy, used when the signal variance vanishes.
    fn zero(m: usize, r: usize, noise_s: &[f64]) -> Self {
        DiscrepancyEstimate {
            delta_s: DVector::zeros(m),
            delta_r: DVector::zeros(r),
            penalty_quadform: 0.0,
            k_ss: DMatrix::zeros(m, m),
            k_z: DMatrix::from_diagonal(&DVector::from_column_slice(noise_s)),
            weights: DVector::zeros(m),
        }
    }
}

/// Conditional discrepancy with a scalar observation-noise variance.
pub fn conditional_discrepancy(
    residuals_s: &[f64],
    locs: &Locations,
    support: &SupportSelection,
    params: &KernelParams,
    sigma2_eps: f64,
) -> Result<DiscrepancyEstimate> {
    let noise = vec![sigma2_eps; support.n_support()];
    conditional_discrepancy_with_noise(residuals_s, locs, support, params, &noise)
}

/// Conditional discrepancy with per-support noise variances on the diagonal
/// of `K_z`.
///
/// `delta_s = K_ss K_z^{-1} z_s`, `delta_r = K_rs K_z^{-1} z_s`.
pub fn conditional_discrepancy_with_noise(
    residuals_s: &[f64],
    locs: &Locations,
    support: &SupportSelection,
    params: &KernelParams,
    noise_s: &[f64],
) -> Result<DiscrepancyEstimate> {
    let m = support.n_support();
    if residuals_s.len() != m || noise_s.len() != m {
        return Err(Error::input(format!(
            "expected {m} residuals and noise variances at supports, got {} and {}",
            residuals_s.len(),
            noise_s.len()
        )));
    }
    if support.n_total() != locs.len() {
        return Err(Error::input("support selection does not match the locations"));
    }
    if let Some(bad) = noise_s.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::input(format!("observation noise variance must be positive, got {bad}")));
    }
    if params.sigma2_d == 0.0 {
        return Ok(DiscrepancyEstimate::zero(m, support.remaining.len(), noise_s));
    }

    let s_locs = locs.subset(&support.support);
    let r_locs = locs.subset(&support.remaining);
    let singular = |what| Error::Singular {
        what,
        psi: params.psi,
        spacing: support.mean_spacing(locs),
    };

    let k_ss = kernel_matrix(&s_locs, &s_locs, params)?;
    let mut k_z = k_ss.clone();
    for (i, v) in noise_s.iter().enumerate() {
        k_z[(i, i)] += v;
    }
    let fz = spd_factor(&k_z, params.sigma2_d).ok_or_else(|| singular("K_z"))?;
    let z_s = DVector::from_column_slice(residuals_s);
    let weights = fz.solve(&z_s);
    let delta_s = &k_ss * &weights;
    let k_rs = kernel_matrix(&r_locs, &s_locs, params)?;
    let delta_r = &k_rs * &weights;

    let fss = spd_factor(&k_ss, params.sigma2_d).ok_or_else(|| singular("K_ss"))?;
    let penalty_quadform = fss.quadform(&delta_s).max(0.0);

    Ok(DiscrepancyEstimate {
        delta_s,
        delta_r,
        penalty_quadform,
        k_ss,
        k_z,
        weights,
    })
}

/// Log of `exp(-1/2 delta_s^T K_ss^{-1} delta_s)`.
pub fn log_discrepancy_penalty(est: &DiscrepancyEstimate) -> f64 {
    -0.5 * est.penalty_quadform
}

/// Reusable sampler for the GP conditional on residuals at supports: mean
/// `delta_hat`, covariance `K_tt - K_ts K_z^{-1} K_st` over all locations.
#[derive(Debug, Clone)]
pub struct ConditionalSampler {
    mean: Vec<f64>,
    /// Low-rank factor of the conditional covariance (n x r).
    factor: DMatrix<f64>,
}

impl ConditionalSampler {
    pub fn new(
        est: &DiscrepancyEstimate,
        locs: &Locations,
        support: &SupportSelection,
        params: &KernelParams,
    ) -> Result<Self> {
        let n = locs.len();
        let mean = est.delta_full(support);
        if params.sigma2_d == 0.0 {
            return Ok(ConditionalSampler {
                mean,
                factor: DMatrix::zeros(n, 0),
            });
        }
        let singular = || Error::Singular {
            what: "conditional covariance",
            psi: params.psi,
            spacing: support.mean_spacing(locs),
        };
        let t = locs.as_slice();
        let s_locs = locs.subset(&support.support);
        let fz = spd_factor(&est.k_z, params.sigma2_d).ok_or_else(singular)?;
        let k_st = kernel_matrix(&s_locs, t, params)?;
        // columns w_j = L_z^{-1} k(s, t_j), so C_ij = k(t_i, t_j) - w_i . w_j
        let w = fz
            .chol
            .l_dirty()
            .solve_lower_triangular(&k_st)
            .ok_or_else(singular)?;
        let diag: Vec<f64> = (0..n)
            .map(|j| params.sigma2_d - w.column(j).norm_squared())
            .collect();
        let tol = 1e-10 * params.sigma2_d;
        let factor = pivoted_cholesky(
            &diag,
            |j| {
                let wj = w.column(j);
                (0..n)
                    .map(|i| params.eval(t[i], t[j]) - w.column(i).dot(&wj))
                    .collect()
            },
            tol,
        )
        .ok_or_else(singular)?;
        Ok(ConditionalSampler { mean, factor })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let r = self.factor.ncols();
        let xi = DVector::from_fn(r, |_, _| rng.sample::<f64, _>(StandardNormal));
        let dev = &self.factor * xi;
        self.mean.iter().zip(dev.iter()).map(|(m, d)| m + d).collect()
    }
}

/// One realization of the discrepancy at every location of the stream.
pub fn gp_conditional_draw<R: Rng + ?Sized>(
    est: &DiscrepancyEstimate,
    locs: &Locations,
    support: &SupportSelection,
    params: &KernelParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(ConditionalSampler::new(est, locs, support, params)?.draw(rng))
}
