//! Data directory layout: one stream file per model stream, a design file
//! for the linear-Gaussian model, and `dataset.toml` naming the model and
//! the stream files so that `predict` can rebuild the problem.

use std::fs;
use std::path::{Path, PathBuf};

use gpdisc::report::io::{parse_stream_records, StreamRecords, Table};
use gpdisc::models::{linear_gaussian_test_model, BasicCovariates, BasicExampleModel, ForwardModel};
use gpdisc::report::{ModelConfig, RunConfig};
use gpdisc::stream::ObservationStream;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "dataset.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dataset {
    /// Stream files in model stream order.
    pub streams: Vec<String>,
    pub model: ModelConfig,
}

pub fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_config(path: &Path) -> CliResult<RunConfig> {
    let text = read(path)?;
    RunConfig::from_toml_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn read_manifest(dir: &Path) -> CliResult<Dataset> {
    let path = dir.join(MANIFEST);
    let text = read(&path)?;
    toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn write_manifest(dir: &Path, dataset: &Dataset) -> CliResult<()> {
    let text = toml::to_string(dataset).map_err(|e| CliError::config(e.to_string()))?;
    write(&dir.join(MANIFEST), &text)
}

/// Stream file names for a config: explicit ones or `<stream>.csv`.
pub fn stream_files(config: &RunConfig) -> Vec<String> {
    config
        .streams
        .clone()
        .unwrap_or_else(|| config.model.stream_names().iter().map(|s| format!("{s}.csv")).collect())
}

/// A forward model with its observation streams.
pub struct Problem {
    pub model: Box<dyn ForwardModel>,
    pub streams: Vec<ObservationStream>,
}

fn load_records(dir: &Path, file: &str) -> CliResult<StreamRecords> {
    let path: PathBuf = dir.join(file);
    let text = read(&path)?;
    Ok(parse_stream_records(&text, &path.display().to_string())?)
}

/// Rebuilds the model and streams from a data directory.
///
/// The basic example takes its covariates from the stream locations in file
/// order; the first sparse record enters the rich-stream prediction. Rows of
/// the linear-Gaussian design follow the stream's location order.
pub fn load_problem(model: &ModelConfig, dir: &Path, files: &[String]) -> CliResult<Problem> {
    let names = model.stream_names();
    if files.len() != names.len() {
        return Err(CliError::config(format!(
            "model {} has {} streams, {} files given",
            model.name(),
            names.len(),
            files.len()
        )));
    }
    let records = files
        .iter()
        .map(|f| load_records(dir, f))
        .collect::<CliResult<Vec<_>>>()?;
    let streams = names
        .iter()
        .zip(&records)
        .map(|(n, r)| ObservationStream::new(n.clone(), r.location.clone(), r.observation.clone(), r.sigma2_eps.clone()))
        .collect::<gpdisc::Result<Vec<_>>>()?;
    let model: Box<dyn ForwardModel> = match model {
        ModelConfig::BasicExample(c) => {
            let cov = BasicCovariates::new(records[0].location.clone(), records[1].location.clone())?;
            Box::new(BasicExampleModel::new(&cov, c.c_model))
        }
        ModelConfig::LinearGaussian(c) => {
            let path = dir.join("design.csv");
            let text = read(&path)?;
            let table = Table::parse(&text, &path.display().to_string())?;
            let d = c.theta_true.len();
            let columns = (0..d)
                .map(|j| table.column_f64(&format!("x{j}")))
                .collect::<gpdisc::Result<Vec<_>>>()?;
            let n = columns.first().map_or(0, Vec::len);
            let design = DMatrix::from_fn(n, d, |i, j| columns[j][i]);
            if design.nrows() != streams[0].len() {
                return Err(CliError::config(format!(
                    "{}: {} rows for {} observations",
                    path.display(),
                    design.nrows(),
                    streams[0].len()
                )));
            }
            Box::new(linear_gaussian_test_model(design)?)
        }
        ModelConfig::External => {
            return Err(CliError::config(
                "the external model is available through the library only",
            ))
        }
    };
    Ok(Problem { model, streams })
}
