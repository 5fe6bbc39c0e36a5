use crate::error::{Error, Result};

/// Central 95% interval and median.
pub const DEFAULT_PROBABILITIES: [f64; 3] = [0.025, 0.5, 0.975];

/// Linear interpolation between order statistics (type 7) of sorted data:
/// `h = (n - 1) p`, `x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h])`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Type-7 quantiles of unsorted data at each probability.
pub fn quantiles(values: &[f64], probabilities: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::input("quantiles of an empty sample"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::input("quantiles of a sample containing NaN"));
    }
    check_probabilities(probabilities)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(probabilities.iter().map(|&p| quantile_sorted(&sorted, p)).collect())
}

pub(crate) fn check_probabilities(probabilities: &[f64]) -> Result<()> {
    if probabilities.is_empty() {
        return Err(Error::config("at least one quantile probability is required"));
    }
    if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::config("quantile probabilities must lie in [0, 1]"));
    }
    if probabilities.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("quantile probabilities must be strictly increasing"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matches_type7_reference() {
        // R: quantile(c(1, 2, 4, 8, 16), c(.1, .5, .9), type = 7) = 1.4, 4, 12.8
        let q = quantiles(&[16.0, 2.0, 8.0, 1.0, 4.0], &[0.1, 0.5, 0.9]).unwrap();
        assert!((q[0] - 1.4).abs() < 1e-12);
        assert_eq!(q[1], 4.0);
        assert!((q[2] - 12.8).abs() < 1e-12);
    }

    #[test]
    fn endpoints_are_extremes() {
        let q = quantiles(&[3.0, -1.0, 2.0], &[0.0, 1.0]).unwrap();
        assert_eq!(q, vec![-1.0, 3.0]);
    }

    #[test]
    fn single_value() {
        assert_eq!(quantiles(&[7.0], &DEFAULT_PROBABILITIES).unwrap(), vec![7.0; 3]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(quantiles(&[], &[0.5]).is_err());
        assert!(quantiles(&[1.0], &[0.5, 0.2]).is_err());
        assert!(quantiles(&[1.0], &[1.5]).is_err());
        assert!(quantiles(&[f64::NAN], &[0.5]).is_err());
    }

    proptest! {
        #[test]
        fn monotone_and_bounded(v in prop::collection::vec(-1e3f64..1e3, 1..60)) {
            let q = quantiles(&v, &[0.0, 0.025, 0.5, 0.975, 1.0]).unwrap();
            prop_assert!(q.windows(2).all(|w| w[0] <= w[1]));
            let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(q[0], min);
            prop_assert_eq!(q[4], max);
        }
    }
}
