use super::archive::PosteriorArchive;
use crate::error::{Error, Result};

pub const MIN_SAMPLES_PER_CHAIN: usize = 10;

/// Potential scale reduction factor of one scalar over several chains.
///
/// Chains are truncated to the shortest one. The finite-sample estimate can
/// dip below one when between-chain variance is small; it is reported as one.
pub fn potential_scale_reduction(chains: &[Vec<f64>]) -> Result<f64> {
    let m = chains.len();
    if m < 2 {
        return Err(Error::Diagnostic(format!("need at least 2 chains, got {m}")));
    }
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    if n < MIN_SAMPLES_PER_CHAIN {
        return Err(Error::Diagnostic(format!(
            "need at least {MIN_SAMPLES_PER_CHAIN} samples per chain, got {n}"
        )));
    }
    let nf = n as f64;
    let means: Vec<f64> = chains.iter().map(|c| c[..n].iter().sum::<f64>() / nf).collect();
    let grand = means.iter().sum::<f64>() / m as f64;
    let between = nf / (m as f64 - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let within = chains
        .iter()
        .zip(&means)
        .map(|(c, mu)| c[..n].iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (nf - 1.0))
        .sum::<f64>()
        / m as f64;
    if within == 0.0 {
        return Ok(if between == 0.0 { 1.0 } else { f64::INFINITY });
    }
    let pooled = (nf - 1.0) / nf * within + between / nf;
    Ok((pooled / within).sqrt().max(1.0))
}

/// Potential scale reduction per scalar parameter of an archive, in the order
/// of [`PosteriorArchive::scalar_names`].
pub fn gelman_rubin(archive: &PosteriorArchive) -> Result<Vec<(String, f64)>> {
    let names = archive.scalar_names();
    let by_chain = archive.by_chain();
    names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let chains: Vec<Vec<f64>> = by_chain
                .iter()
                .map(|c| c.iter().map(|s| archive.scalars(s)[j]).collect())
                .collect();
            Ok((name.clone(), potential_scale_reduction(&chains)?))
        })
        .collect()
}
