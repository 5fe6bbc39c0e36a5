use super::quantile::{check_probabilities, quantiles, DEFAULT_PROBABILITIES};
use crate::error::{Error, Result};
use crate::inference::{gelman_rubin, PosteriorArchive, Scenario, MIN_SAMPLES_PER_CHAIN};

/// Normalized discrepancy variance samples of one stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamDiscrepancy {
    pub stream: String,
    pub sigma2: Vec<f64>,
    pub ln_sigma2: Vec<f64>,
    /// Quantiles of `sigma2` at the summary probabilities.
    pub quantiles: Vec<f64>,
    pub ln_quantiles: Vec<f64>,
}

/// Sample-wise ratio `sigma2_numerator / sigma2_denominator`.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamRatio {
    pub numerator: String,
    pub denominator: String,
    pub quantiles: Vec<f64>,
    pub ln_quantiles: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancySummary {
    pub probabilities: Vec<f64>,
    pub streams: Vec<StreamDiscrepancy>,
    /// Every ordered pair of distinct streams.
    pub ratios: Vec<StreamRatio>,
}

impl DiscrepancySummary {
    /// Builds the summary from per-stream samples, which must all have the
    /// same length.
    pub fn from_samples(names: &[String], sigma2: Vec<Vec<f64>>, probabilities: &[f64]) -> Result<Self> {
        check_probabilities(probabilities)?;
        if names.len() != sigma2.len() {
            return Err(Error::input("one sample vector per stream is required"));
        }
        let n = sigma2.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::EmptyArchive);
        }
        if sigma2.iter().any(|v| v.len() != n) {
            return Err(Error::input("streams hold unequal numbers of samples"));
        }
        if let Some(v) = sigma2.iter().flatten().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::input(format!("discrepancy variance must be positive, got {v}")));
        }
        let streams = names
            .iter()
            .zip(sigma2)
            .map(|(name, s)| {
                let ln: Vec<f64> = s.iter().map(|v| v.ln()).collect();
                Ok(StreamDiscrepancy {
                    stream: name.clone(),
                    quantiles: quantiles(&s, probabilities)?,
                    ln_quantiles: quantiles(&ln, probabilities)?,
                    sigma2: s,
                    ln_sigma2: ln,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut ratios = Vec::new();
        for num in &streams {
            for den in &streams {
                if num.stream == den.stream {
                    continue;
                }
                let r: Vec<f64> = num.sigma2.iter().zip(&den.sigma2).map(|(a, b)| a / b).collect();
                let ln: Vec<f64> = num.ln_sigma2.iter().zip(&den.ln_sigma2).map(|(a, b)| a - b).collect();
                ratios.push(StreamRatio {
                    numerator: num.stream.clone(),
                    denominator: den.stream.clone(),
                    quantiles: quantiles(&r, probabilities)?,
                    ln_quantiles: quantiles(&ln, probabilities)?,
                });
            }
        }
        Ok(DiscrepancySummary {
            probabilities: probabilities.to_vec(),
            streams,
            ratios,
        })
    }

    pub fn stream(&self, name: &str) -> Option<&StreamDiscrepancy> {
        self.streams.iter().find(|s| s.stream == name)
    }

    pub fn ratio(&self, numerator: &str, denominator: &str) -> Option<&StreamRatio> {
        self.ratios
            .iter()
            .find(|r| r.numerator == numerator && r.denominator == denominator)
    }
}

/// Normalized discrepancy variances of a GP-scenario archive with their
/// logarithms, quantiles and cross-stream ratios.
pub fn discrepancy_summary(archive: &PosteriorArchive, probabilities: &[f64]) -> Result<DiscrepancySummary> {
    if archive.scenario != Scenario::Gp {
        return Err(Error::input(
            "discrepancy summary needs a GP-scenario archive; an ignore-scenario archive has no discrepancy hyperparameters",
        ));
    }
    if archive.is_empty() {
        return Err(Error::EmptyArchive);
    }
    archive.validate()?;
    let sigma2 = (0..archive.stream_names.len())
        .map(|k| archive.samples.iter().map(|s| s.sigma2[k]).collect())
        .collect();
    DiscrepancySummary::from_samples(&archive.stream_names, sigma2, probabilities)
}

/// Posterior summary of one scalar parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub quantiles: Vec<f64>,
    /// Potential scale reduction; `None` with too few chains or samples.
    pub rhat: Option<f64>,
}

/// Mean, standard deviation, quantiles and potential scale reduction of
/// every scalar in the archive.
pub fn parameter_summaries(archive: &PosteriorArchive, probabilities: &[f64]) -> Result<Vec<ParameterSummary>> {
    if archive.is_empty() {
        return Err(Error::EmptyArchive);
    }
    archive.validate()?;
    let per_chain = archive.by_chain().iter().map(Vec::len).min().unwrap_or(0);
    let rhat = if archive.chains >= 2 && per_chain >= MIN_SAMPLES_PER_CHAIN {
        Some(gelman_rubin(archive)?)
    } else {
        None
    };
    archive
        .scalar_names()
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let v = archive.column(j);
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let sd = if v.len() > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            Ok(ParameterSummary {
                quantiles: quantiles(&v, probabilities)?,
                rhat: rhat.as_ref().map(|r| r[j].1),
                name,
                mean,
                sd,
            })
        })
        .collect()
}

/// [`discrepancy_summary`] at the default probabilities.
pub fn default_discrepancy_summary(archive: &PosteriorArchive) -> Result<DiscrepancySummary> {
    discrepancy_summary(archive, &DEFAULT_PROBABILITIES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::ArchiveSample;

    fn archive(scenario: Scenario, sigma2: impl Fn(usize) -> Vec<f64>) -> PosteriorArchive {
        let k = if scenario == Scenario::Gp { 2 } else { 0 };
        PosteriorArchive {
            scenario,
            model: "test".into(),
            parameter_names: vec!["a".into()],
            stream_names: vec!["sparse".into(), "rich".into()],
            stream_noise: vec![1.0, 1.0],
            chains: 2,
            populations: 1,
            cycles: 40,
            burn_in: 20,
            thinning: 1,
            seed: 0,
            config_fingerprint: String::new(),
            samples: (0..40)
                .map(|i| ArchiveSample {
                    chain: i % 2,
                    generation: 20 + i / 2,
                    theta: vec![i as f64],
                    psi: vec![0.5; k],
                    sigma2: if k > 0 { sigma2(i) } else { vec![] },
                    logp: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn unit_variances_have_zero_logs() {
        let s = default_discrepancy_summary(&archive(Scenario::Gp, |_| vec![1.0, 1.0])).unwrap();
        for st in &s.streams {
            assert!(st.ln_sigma2.iter().all(|v| *v == 0.0));
            assert_eq!(st.ln_quantiles, vec![0.0; 3]);
        }
    }

    #[test]
    fn doubled_stream_gives_ratio_two() {
        let s = default_discrepancy_summary(&archive(Scenario::Gp, |i| {
            let x = 0.1 + i as f64;
            vec![x, 2.0 * x]
        }))
        .unwrap();
        let r = s.ratio("rich", "sparse").unwrap();
        assert!(r.quantiles.iter().all(|q| (q - 2.0).abs() < 1e-12));
        let inv = s.ratio("sparse", "rich").unwrap();
        assert!(inv.quantiles.iter().all(|q| (q - 0.5).abs() < 1e-12));
    }

    #[test]
    fn ignore_archive_is_rejected() {
        assert!(default_discrepancy_summary(&archive(Scenario::Ignore, |_| vec![])).is_err());
    }

    #[test]
    fn nonpositive_variance_is_rejected() {
        assert!(default_discrepancy_summary(&archive(Scenario::Gp, |_| vec![0.0, 1.0])).is_err());
    }

    #[test]
    fn parameter_summary_moments() {
        let s = parameter_summaries(&archive(Scenario::Ignore, |_| vec![]), &DEFAULT_PROBABILITIES).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0].mean - 19.5).abs() < 1e-12);
        assert_eq!(s[0].quantiles[1], 19.5);
        // chains interleave over the same range
        assert!(s[0].rhat.unwrap() < 1.1);
    }
}
