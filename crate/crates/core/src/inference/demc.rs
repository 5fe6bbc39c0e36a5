//! Differential-evolution proposals and the Metropolis decision.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Probability of using a unit step factor, letting chains jump between modes.
pub const MODE_JUMP_PROBABILITY: f64 = 0.1;

/// Default relative jitter, scaled by the prior range of each dimension.
pub const JITTER_RELATIVE: f64 = 1e-6;

/// `2.38 / sqrt(2 d)`.
pub fn default_gamma(dimension: usize) -> f64 {
    2.38 / (2.0 * dimension as f64).sqrt()
}

/// Picks the step factor for one proposal: the default with probability 0.9,
/// otherwise 1.
pub fn draw_gamma<R: Rng + ?Sized>(dimension: usize, rng: &mut R) -> f64 {
    if rng.random::<f64>() < MODE_JUMP_PROBABILITY {
        1.0
    } else {
        default_gamma(dimension)
    }
}

/// `current + gamma (x_a - x_b) + e`, with `a != b` drawn uniformly from
/// `population` and `e ~ N(0, diag(jitter_sd^2))`.
///
/// `population` holds snapshots of chain states, either the current states of
/// the other chains or an archive of past states; `exclude` marks the target
/// chain's own entry, which is never used as a partner.
pub fn demc_propose<R: Rng + ?Sized>(
    current: &[f64],
    exclude: Option<usize>,
    population: &[Vec<f64>],
    gamma: f64,
    jitter_sd: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = population.len();
    if n < 3 {
        return Err(Error::config(format!(
            "differential evolution needs at least 3 chains per population, got {n}"
        )));
    }
    if exclude.is_some_and(|t| t >= n) {
        return Err(Error::config("target chain is not part of the population"));
    }
    if jitter_sd.len() != current.len() || population.iter().any(|p| p.len() != current.len()) {
        return Err(Error::input("population dimension does not match the state"));
    }
    let excl: Vec<usize> = exclude.into_iter().collect();
    let a = pick_other(n, &excl, rng);
    let mut excl_b = excl;
    excl_b.push(a);
    let b = pick_other(n, &excl_b, rng);
    let (xa, xb) = (&population[a], &population[b]);
    Ok(current
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let e = if jitter_sd[j] > 0.0 {
                jitter_sd[j] * rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            };
            x + gamma * (xa[j] - xb[j]) + e
        })
        .collect())
}

fn pick_other<R: Rng + ?Sized>(n: usize, exclude: &[usize], rng: &mut R) -> usize {
    loop {
        let i = rng.random_range(0..n);
        if !exclude.contains(&i) {
            return i;
        }
    }
}

/// Metropolis decision on log densities: accept iff `u < exp(proposed - current)`.
pub fn metropolis_accept<R: Rng + ?Sized>(logp_current: f64, logp_proposed: f64, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    if logp_proposed.is_nan() || logp_proposed == f64::NEG_INFINITY {
        return false;
    }
    if logp_current == f64::NEG_INFINITY {
        return true;
    }
    u < (logp_proposed - logp_current).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equal_partners_leave_only_jitter() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pop = vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]];
        let prop = demc_propose(&[0.0, 0.0], Some(0), &pop, 1.19, &[0.0, 0.0], &mut rng).unwrap();
        assert_eq!(prop, vec![0.0, 0.0]);
    }

    #[test]
    fn zero_gamma_and_jitter_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pop = vec![vec![0.5, 1.5], vec![3.0, 1.0], vec![-2.0, 4.0]];
        let prop = demc_propose(&[0.5, 1.5], Some(0), &pop, 0.0, &[0.0, 0.0], &mut rng).unwrap();
        assert_eq!(prop, vec![0.5, 1.5]);
    }

    #[test]
    fn default_gamma_in_two_dimensions() {
        assert!((default_gamma(2) - 1.19).abs() < 1e-12);
    }

    #[test]
    fn small_population_is_a_config_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pop = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            demc_propose(&[0.0], Some(0), &pop, 1.0, &[0.0], &mut rng),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn partners_differ_from_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pop = vec![vec![0.0], vec![1.0], vec![10.0]];
        for _ in 0..100 {
            // target 0: partners are 1 and 10 in some order
            let p = demc_propose(&[0.0], Some(0), &pop, 1.0, &[0.0], &mut rng).unwrap();
            assert!(p[0] == 9.0 || p[0] == -9.0);
        }
    }

    #[test]
    fn archive_partners_are_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pop = vec![vec![0.0], vec![0.0], vec![5.0]];
        let mut nonzero = 0;
        for _ in 0..200 {
            let p = demc_propose(&[1.0], None, &pop, 1.0, &[0.0], &mut rng).unwrap();
            assert!(p[0] == 1.0 || p[0] == 6.0 || p[0] == -4.0);
            nonzero += usize::from(p[0] != 1.0);
        }
        assert!(nonzero > 100);
    }

    #[test]
    fn accept_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert!(metropolis_accept(-1.0, -1.0, &mut rng));
            assert!(metropolis_accept(-1.0, 0.0, &mut rng));
            assert!(!metropolis_accept(-1.0, f64::NEG_INFINITY, &mut rng));
            assert!(metropolis_accept(f64::NEG_INFINITY, -5.0, &mut rng));
        }
    }

    #[test]
    fn half_ratio_accepts_half_the_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        let acc = (0..n).filter(|_| metropolis_accept(0.0, 0.5f64.ln(), &mut rng)).count();
        let rate = acc as f64 / n as f64;
        assert!((rate - 0.5).abs() < 0.01, "rate {rate}");
    }
}
