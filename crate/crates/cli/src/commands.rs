use std::path::Path;

use gpdisc::inference::{run_sampler, PosteriorArchive, Scenario};
use gpdisc::models::{generate_linear_gaussian, generate_synthetic_data, ForwardModel};
use gpdisc::optimize::{
    bfgs_minimize, fixed_gp_config, GpFixedObjective, IgnoreObjective, Objective, OptimumReport,
};
use gpdisc::report::io::{
    emit_archive, emit_band, emit_columns, emit_discrepancy_quantiles, emit_discrepancy_summary, emit_optimum,
    emit_parameter_summaries, emit_stream_records, fmt_f64, parse_archive, StreamRecords,
};
use gpdisc::report::{
    discrepancy_summary, laplace_archive, parameter_summaries, predictive_posterior, ModelConfig, PredictiveBand,
    PredictiveOptions, RunConfig, DEFAULT_PROBABILITIES,
};
use gpdisc::stream::ObservationStream;
use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{self, Dataset, Problem};
use crate::error::{CliError, CliResult};

/// Objective of the `optimize` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OptimizeScenario {
    Ignore,
    GpFixed,
}

const DEFAULT_LAPLACE_DRAWS: usize = 2000;

fn records(locations: &[f64], observations: &[f64], sigma2: f64) -> StreamRecords {
    StreamRecords {
        location: locations.to_vec(),
        observation: observations.to_vec(),
        sigma2_eps: vec![sigma2; locations.len()],
    }
}

fn truth_table(locations: &[f64], truth: &[f64]) -> CliResult<String> {
    Ok(emit_columns(&["location", "truth"], &[locations, truth])?)
}

/// Writes synthetic streams in draw order, the noise-free truth and the
/// dataset manifest.
pub fn generate(config: &Path, out: &Path) -> CliResult<()> {
    let cfg = data::read_config(config)?;
    data::create_dir(out)?;
    let files = data::stream_files(&cfg);
    match &cfg.model {
        ModelConfig::BasicExample(c) => {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let d = generate_synthetic_data(c, &mut rng)?;
            let cov = &d.covariates;
            let streams = [
                (&cov.x_sparse, &d.obs_sparse, &d.truth_sparse, d.sd_sparse),
                (&cov.x_rich, &d.obs_rich, &d.truth_rich, d.sd_rich),
            ];
            for ((x, obs, truth, sd), (file, name)) in streams.iter().zip(files.iter().zip(cfg.model.stream_names())) {
                data::write(&out.join(file), &emit_stream_records(&records(x, obs, sd * sd))?)?;
                data::write(&out.join(format!("truth_{name}.csv")), &truth_table(x, truth)?)?;
            }
            info!("generated {} sparse and {} rich records", c.n_sparse, c.n_rich);
        }
        ModelConfig::LinearGaussian(c) => {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let (model, stream, truth) = generate_linear_gaussian(c, &mut rng)?;
            let x = stream.locations.as_slice();
            data::write(&out.join(&files[0]), &emit_stream_records(&records(x, &stream.observations, c.noise_sd * c.noise_sd))?)?;
            data::write(&out.join("truth_y.csv"), &truth_table(x, &truth)?)?;
            let design = model.design();
            let names: Vec<String> = (0..design.ncols()).map(|j| format!("x{j}")).collect();
            let header: Vec<&str> = names.iter().map(String::as_str).collect();
            let columns: Vec<Vec<f64>> = design.column_iter().map(|c| c.iter().copied().collect()).collect();
            let cols: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
            data::write(&out.join("design.csv"), &emit_columns(&header, &cols)?)?;
            info!("generated {} linear-gaussian records", c.n);
        }
        ModelConfig::External => {
            return Err(CliError::config("cannot generate data for the external model"));
        }
    }
    data::write_manifest(
        out,
        &Dataset {
            streams: files,
            model: cfg.model.clone(),
        },
    )
}

fn load(cfg: &RunConfig, dir: &Path) -> CliResult<Problem> {
    data::load_problem(&cfg.model, dir, &data::stream_files(cfg))
}

pub fn invert(config: &Path, data_dir: &Path, out: &Path, scenario: Option<Scenario>, seed: Option<u64>) -> CliResult<()> {
    let mut cfg = data::read_config(config)?;
    if let Some(s) = scenario {
        cfg.scenario = s;
    }
    if let Some(s) = seed {
        cfg.sampler.seed = s;
    }
    let problem = load(&cfg, data_dir)?;
    let priors = cfg.priors(&problem.streams)?;
    info!(
        "sampling {} scenario: {} chains x {} cycles",
        cfg.scenario, cfg.sampler.chains, cfg.sampler.cycles
    );
    let mut archive = run_sampler(&cfg.sampler, &priors, problem.model.as_ref(), &problem.streams, cfg.scenario)?;
    archive.model = cfg.model.name().to_string();
    data::create_dir(out)?;
    data::write(&out.join("archive.csv"), &emit_archive(&archive)?)?;
    info!("wrote {} samples", archive.samples.len());
    Ok(())
}

/// Per-stream table of observations, the fitted model and, under the fixed
/// GP, the fitted model plus the latent discrepancy.
fn fit_tables(
    theta: &[f64],
    model: &dyn ForwardModel,
    streams: &[ObservationStream],
    gp: Option<&gpdisc::optimize::FixedGpConfig>,
) -> CliResult<Vec<String>> {
    let g = model.evaluate(theta)?;
    streams
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut header = vec!["location", "observation", "model"];
            let mut cols: Vec<Vec<f64>> = vec![s.locations.as_slice().to_vec(), s.observations.clone(), g[k].clone()];
            if let Some(f) = gp {
                let fs = &f.streams[k];
                let terms = gpdisc::inference::stream_terms(s, &g[k], &fs.kernel()?, &fs.support)?;
                let delta = terms.estimate.delta_full(&fs.support);
                header.push("model_plus_discrepancy");
                cols.push(g[k].iter().zip(&delta).map(|(a, b)| a + b).collect());
            }
            let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
            Ok(emit_columns(&header, &refs)?)
        })
        .collect()
}

pub fn optimize(config: &Path, data_dir: &Path, out: &Path, scenario: Option<OptimizeScenario>) -> CliResult<()> {
    let cfg = data::read_config(config)?;
    let scenario = scenario.unwrap_or(match cfg.scenario {
        Scenario::Ignore => OptimizeScenario::Ignore,
        Scenario::Gp => OptimizeScenario::GpFixed,
    });
    let problem = load(&cfg, data_dir)?;
    let (model, streams) = (problem.model.as_ref(), problem.streams.as_slice());
    let theta0 = cfg.theta0()?;
    let fixed = match scenario {
        OptimizeScenario::Ignore => None,
        OptimizeScenario::GpFixed => Some(fixed_gp_config(streams, cfg.optimize.signal_variance)?),
    };
    let report: OptimumReport = {
        let obj: Box<dyn Objective> = match &fixed {
            None => Box::new(IgnoreObjective::new(model, streams)?),
            Some(f) => Box::new(GpFixedObjective::new(model, streams, f)?),
        };
        bfgs_minimize(obj.as_ref(), &theta0, &cfg.optimize.bfgs)?
    };
    if !report.converged {
        warn!("optimizer did not converge: {}", report.message);
    }
    let label = match scenario {
        OptimizeScenario::Ignore => "ignore",
        OptimizeScenario::GpFixed => "gp-fixed",
    };
    data::create_dir(out)?;
    let names = model.parameter_names();
    data::write(
        &out.join("optimum.csv"),
        &emit_optimum(&report, &names, &[("objective", label.to_string()), ("model", cfg.model.name().into())])?,
    )?;
    for (s, table) in streams.iter().zip(fit_tables(&report.theta_hat, model, streams, fixed.as_ref())?) {
        data::write(&out.join(format!("fit_{}.csv", s.name)), &table)?;
    }
    if report.laplace_cov.is_some() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.sampler.seed);
        let draws = cfg.optimize.laplace_draws.unwrap_or(DEFAULT_LAPLACE_DRAWS);
        let mut archive = laplace_archive(&report, model, streams, fixed.as_ref(), draws, &mut rng)?;
        archive.model = cfg.model.name().to_string();
        if draws > 0 {
            let bands = predictive_posterior(&archive, model, streams, &mut rng, &cfg.predict)?;
            write_bands(out, &bands)?;
        }
    } else {
        warn!("no Laplace covariance; predictive bands skipped");
    }
    info!("{label} optimum {:?} after {} iterations", report.theta_hat, report.iterations);
    Ok(())
}

fn write_bands(out: &Path, bands: &[PredictiveBand]) -> CliResult<()> {
    for b in bands {
        data::write(&out.join(format!("band_{}.csv", b.stream)), &emit_band(b)?)?;
    }
    Ok(())
}

fn read_archive(path: &Path) -> CliResult<PosteriorArchive> {
    let text = data::read(path)?;
    Ok(parse_archive(&text, &path.display().to_string())?)
}

pub fn report(archive: &Path, out: &Path) -> CliResult<()> {
    let a = read_archive(archive)?;
    data::create_dir(out)?;
    let p = DEFAULT_PROBABILITIES;
    let summaries = parameter_summaries(&a, &p)?;
    data::write(&out.join("parameters.csv"), &emit_parameter_summaries(&summaries, &p)?)?;
    let mut rhat = String::from("parameter,rhat\n");
    for s in &summaries {
        match s.rhat {
            Some(r) => rhat.push_str(&format!("{},{}\n", s.name, fmt_f64(r))),
            None => warn!("too few chains or samples for a potential scale reduction of {}", s.name),
        }
    }
    data::write(&out.join("gelman_rubin.csv"), &rhat)?;
    if a.scenario == Scenario::Gp {
        let d = discrepancy_summary(&a, &p)?;
        data::write(&out.join("discrepancy.csv"), &emit_discrepancy_summary(&d)?)?;
        data::write(&out.join("discrepancy_quantiles.csv"), &emit_discrepancy_quantiles(&d)?)?;
        for st in &d.streams {
            info!("median ln sigma2 of {}: {:.3}", st.stream, st.ln_quantiles[1]);
        }
    }
    Ok(())
}

pub fn predict(archive: &Path, data_dir: &Path, out: &Path) -> CliResult<()> {
    let a = read_archive(archive)?;
    let dataset = data::read_manifest(data_dir)?;
    if !a.model.is_empty() && a.model != dataset.model.name() {
        return Err(CliError::config(format!(
            "archive was produced with model {}, data set holds {}",
            a.model,
            dataset.model.name()
        )));
    }
    let problem = data::load_problem(&dataset.model, data_dir, &dataset.streams)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let bands = predictive_posterior(&a, problem.model.as_ref(), &problem.streams, &mut rng, &PredictiveOptions::default())?;
    data::create_dir(out)?;
    write_bands(out, &bands)?;
    for (b, s) in bands.iter().zip(&problem.streams) {
        info!("{}: {} of {} observations outside the band", b.stream, b.outside(&s.observations), s.len());
    }
    Ok(())
}
