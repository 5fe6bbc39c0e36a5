use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether discrepancy is ignored or represented by a GP per stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Ignore,
    Gp,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Ignore => "ignore",
            Scenario::Gp => "gp",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ignore" => Ok(Scenario::Ignore),
            "gp" => Ok(Scenario::Gp),
            other => Err(Error::config(format!("unknown scenario '{other}' (expected ignore|gp)"))),
        }
    }
}

/// One retained state of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveSample {
    pub chain: usize,
    /// Cycle index at which the state was recorded.
    pub generation: usize,
    pub theta: Vec<f64>,
    /// Per stream; empty under the ignore scenario.
    pub psi: Vec<f64>,
    /// Normalized discrepancy variance per stream; empty under the ignore scenario.
    pub sigma2: Vec<f64>,
    pub logp: f64,
}

/// Thinned post-burn-in samples of all chains, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorArchive {
    pub scenario: Scenario,
    pub model: String,
    pub parameter_names: Vec<String>,
    pub stream_names: Vec<String>,
    /// Mean observation-noise variance per stream.
    pub stream_noise: Vec<f64>,
    pub chains: usize,
    pub populations: usize,
    pub cycles: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    pub config_fingerprint: String,
    pub samples: Vec<ArchiveSample>,
}

impl PosteriorArchive {
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples grouped by chain, in recording order.
    pub fn by_chain(&self) -> Vec<Vec<&ArchiveSample>> {
        let mut out = vec![Vec::new(); self.chains];
        for s in &self.samples {
            if s.chain < self.chains {
                out[s.chain].push(s);
            }
        }
        out
    }

    /// Names of all scalar parameters: model parameters, then per-stream
    /// `psi_<stream>` and `sigma2_<stream>` under the GP scenario.
    pub fn scalar_names(&self) -> Vec<String> {
        let mut names = self.parameter_names.clone();
        if self.scenario == Scenario::Gp {
            for s in &self.stream_names {
                names.push(format!("psi_{s}"));
                names.push(format!("sigma2_{s}"));
            }
        }
        names
    }

    /// Values of [`PosteriorArchive::scalar_names`] for one sample.
    pub fn scalars(&self, sample: &ArchiveSample) -> Vec<f64> {
        let mut v = sample.theta.clone();
        if self.scenario == Scenario::Gp {
            for (p, s) in sample.psi.iter().zip(&sample.sigma2) {
                v.push(*p);
                v.push(*s);
            }
        }
        v
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.samples.iter().map(|s| self.scalars(s)[index]).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 {
            return Err(Error::input("thinning interval must be at least 1"));
        }
        let d = self.parameter_names.len();
        let k = if self.scenario == Scenario::Gp { self.stream_names.len() } else { 0 };
        for s in &self.samples {
            if s.theta.len() != d || s.psi.len() != k || s.sigma2.len() != k {
                return Err(Error::input("archive sample does not match its header"));
            }
            if s.chain >= self.chains {
                return Err(Error::input(format!("sample refers to chain {} of {}", s.chain, self.chains)));
            }
        }
        let counts: Vec<usize> = self.by_chain().iter().map(|c| c.len()).collect();
        if counts.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::input("chains hold unequal numbers of samples"));
        }
        Ok(())
    }
}
