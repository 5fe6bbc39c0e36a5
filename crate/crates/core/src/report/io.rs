//! Columnar text formats. Every table is comma-separated with a one-line
//! header, optionally preceded by `# key = value` metadata lines. Floats are
//! written with 17 significant digits so that parsing restores them exactly.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::predictive::{PredictiveBand, QuantileBand};
use super::summary::{DiscrepancySummary, ParameterSummary};
use crate::error::{Error, Result};
use crate::inference::{ArchiveSample, PosteriorArchive, Scenario};
use crate::optimize::OptimumReport;
use crate::stream::ObservationStream;

const ARCHIVE_FORMAT: &str = "gpdisc-archive 1";

/// `{:.16e}`: shortest fixed width that round-trips every finite double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.contains([',', '#', '=', '\n', '\r', '"']) || name.trim() != name {
        return Err(Error::input(format!("name '{name}' cannot be written to a table")));
    }
    Ok(())
}

fn check_value(value: &str) -> Result<()> {
    if value.contains(['\n', '\r']) {
        return Err(Error::input("metadata values must be single-line"));
    }
    Ok(())
}

/// A parsed table: metadata, header and string cells with source lines.
#[derive(Debug, Clone)]
pub struct Table {
    source: String,
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    lines: Vec<usize>,
    header_line: usize,
}

impl Table {
    pub fn parse(text: &str, source: &str) -> Result<Table> {
        let mut meta = Vec::new();
        let mut offset = 0;
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let trimmed = line.trim_end_matches(['\n', '\r']);
            let Some(rest) = trimmed.strip_prefix('#') else {
                if !trimmed.trim().is_empty() {
                    break;
                }
                body_start += line.len();
                offset += 1;
                continue;
            };
            offset += 1;
            body_start += line.len();
            let (k, v) = rest.split_once('=').ok_or_else(|| Error::Parse {
                file: source.into(),
                line: offset,
                msg: "metadata line must read '# key = value'".into(),
            })?;
            meta.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(&text.as_bytes()[body_start..]);
        let perr = |line: usize, msg: String| Error::Parse {
            file: source.into(),
            line,
            msg,
        };
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| perr(offset + 1, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(perr(offset + 1, "missing header line".into()));
        }
        let mut rows = Vec::new();
        let mut lines = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                perr(offset + line, e.to_string())
            })?;
            let line = offset + rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() != header.len() {
                return Err(perr(line, format!("expected {} fields, found {}", header.len(), rec.len())));
            }
            rows.push(rec.iter().map(str::to_string).collect());
            lines.push(line);
        }
        Ok(Table {
            source: source.into(),
            meta,
            header,
            rows,
            lines,
            header_line: offset + 1,
        })
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            file: self.source.clone(),
            line,
            msg: msg.into(),
        }
    }

    pub fn meta(&self, key: &str) -> Result<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| self.err(1, format!("missing metadata '{key}'")))
    }

    fn meta_parse<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let line = self.meta.iter().position(|(k, _)| k == key).map_or(1, |i| i + 1);
        self.meta(key)?
            .parse()
            .map_err(|e| self.err(line, format!("metadata '{key}': {e}")))
    }

    fn meta_list(&self, key: &str) -> Result<Vec<String>> {
        let v = self.meta(key)?;
        Ok(if v.is_empty() {
            Vec::new()
        } else {
            v.split(',').map(|s| s.trim().to_string()).collect()
        })
    }

    fn meta_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let line = self.meta.iter().position(|(k, _)| k == key).map_or(1, |i| i + 1);
        self.meta_list(key)?
            .iter()
            .map(|s| s.parse().map_err(|e| self.err(line, format!("metadata '{key}': {e}"))))
            .collect()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| self.err(self.header_line, format!("missing column '{name}'")))
    }

    fn cell<T: std::str::FromStr>(&self, row: usize, col: usize) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let s = &self.rows[row][col];
        s.parse()
            .map_err(|e| self.err(self.lines[row], format!("column '{}': cannot parse '{s}': {e}", self.header[col])))
    }

    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.column_index(name)?;
        (0..self.rows.len()).map(|i| self.cell(i, j)).collect()
    }

    fn optional_f64(&self, row: usize, col: usize) -> Result<Option<f64>> {
        if self.rows[row][col].is_empty() {
            Ok(None)
        } else {
            self.cell(row, col).map(Some)
        }
    }

    fn expect_header(&self, expected: &[String]) -> Result<()> {
        if self.header != expected {
            return Err(self.err(
                self.header_line,
                format!("header '{}' does not match expected '{}'", self.header.join(","), expected.join(",")),
            ));
        }
        Ok(())
    }
}

fn write_meta(out: &mut String, key: &str, value: &str) -> Result<()> {
    check_value(value)?;
    writeln!(out, "# {key} = {value}").expect("write to string");
    Ok(())
}

/// Writes named float columns of equal length.
pub fn emit_columns(header: &[&str], columns: &[&[f64]]) -> Result<String> {
    if header.len() != columns.len() {
        return Err(Error::input("one header entry per column is required"));
    }
    for h in header {
        check_name(h)?;
    }
    let n = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::input("columns differ in length"));
    }
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..n {
        let row: Vec<String> = columns.iter().map(|c| fmt_f64(c[i])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Raw stream records in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamRecords {
    pub location: Vec<f64>,
    pub observation: Vec<f64>,
    pub sigma2_eps: Vec<f64>,
}

pub fn emit_stream_records(r: &StreamRecords) -> Result<String> {
    emit_columns(
        &["location", "observation", "sigma2_eps"],
        &[&r.location, &r.observation, &r.sigma2_eps],
    )
}

pub fn parse_stream_records(text: &str, source: &str) -> Result<StreamRecords> {
    let t = Table::parse(text, source)?;
    Ok(StreamRecords {
        location: t.column_f64("location")?,
        observation: t.column_f64("observation")?,
        sigma2_eps: t.column_f64("sigma2_eps")?,
    })
}

/// Stream records in location order.
pub fn emit_stream(s: &ObservationStream) -> Result<String> {
    emit_stream_records(&StreamRecords {
        location: s.locations.as_slice().to_vec(),
        observation: s.observations.clone(),
        sigma2_eps: s.sigma2_eps.clone(),
    })
}

pub fn parse_stream(text: &str, name: &str, source: &str) -> Result<ObservationStream> {
    let r = parse_stream_records(text, source)?;
    ObservationStream::new(name, r.location, r.observation, r.sigma2_eps)
}

fn archive_header(a: &PosteriorArchive) -> Vec<String> {
    let mut h = vec!["chain".to_string(), "generation".to_string()];
    h.extend(a.parameter_names.iter().cloned());
    if a.scenario == Scenario::Gp {
        for s in &a.stream_names {
            h.push(format!("psi_{s}"));
            h.push(format!("sigma2_{s}"));
        }
    }
    h.push("logp".into());
    h
}

/// One row per retained sample: chain, generation, parameters, per-stream
/// correlation length and normalized variance (GP scenario), log density.
pub fn emit_archive(a: &PosteriorArchive) -> Result<String> {
    a.validate()?;
    for n in a.parameter_names.iter().chain(&a.stream_names) {
        check_name(n)?;
    }
    check_name(&a.model).or_else(|e| if a.model.is_empty() { Ok(()) } else { Err(e) })?;
    let mut out = String::new();
    write_meta(&mut out, "format", ARCHIVE_FORMAT)?;
    write_meta(&mut out, "scenario", &a.scenario.to_string())?;
    write_meta(&mut out, "model", &a.model)?;
    write_meta(&mut out, "parameters", &a.parameter_names.join(","))?;
    write_meta(&mut out, "streams", &a.stream_names.join(","))?;
    write_meta(&mut out, "stream_noise", &join_f64(&a.stream_noise))?;
    write_meta(&mut out, "chains", &a.chains.to_string())?;
    write_meta(&mut out, "populations", &a.populations.to_string())?;
    write_meta(&mut out, "cycles", &a.cycles.to_string())?;
    write_meta(&mut out, "burn_in", &a.burn_in.to_string())?;
    write_meta(&mut out, "thinning", &a.thinning.to_string())?;
    write_meta(&mut out, "seed", &a.seed.to_string())?;
    write_meta(&mut out, "fingerprint", &a.config_fingerprint)?;
    out.push_str(&archive_header(a).join(","));
    out.push('\n');
    for s in &a.samples {
        let mut row = vec![s.chain.to_string(), s.generation.to_string()];
        row.extend(s.theta.iter().map(|x| fmt_f64(*x)));
        for (p, v) in s.psi.iter().zip(&s.sigma2) {
            row.push(fmt_f64(*p));
            row.push(fmt_f64(*v));
        }
        row.push(fmt_f64(s.logp));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_archive(text: &str, source: &str) -> Result<PosteriorArchive> {
    let t = Table::parse(text, source)?;
    let format = t.meta("format")?;
    if format != ARCHIVE_FORMAT {
        return Err(t.err(1, format!("unsupported archive format '{format}'")));
    }
    let scenario: Scenario = t.meta("scenario")?.parse().map_err(|e: Error| t.err(1, e.to_string()))?;
    let mut a = PosteriorArchive {
        scenario,
        model: t.meta("model")?.to_string(),
        parameter_names: t.meta_list("parameters")?,
        stream_names: t.meta_list("streams")?,
        stream_noise: t.meta_f64_list("stream_noise")?,
        chains: t.meta_parse("chains")?,
        populations: t.meta_parse("populations")?,
        cycles: t.meta_parse("cycles")?,
        burn_in: t.meta_parse("burn_in")?,
        thinning: t.meta_parse("thinning")?,
        seed: t.meta_parse("seed")?,
        config_fingerprint: t.meta("fingerprint")?.to_string(),
        samples: Vec::with_capacity(t.rows.len()),
    };
    t.expect_header(&archive_header(&a))?;
    let d = a.parameter_names.len();
    let k = if scenario == Scenario::Gp { a.stream_names.len() } else { 0 };
    for i in 0..t.rows.len() {
        let theta = (0..d).map(|j| t.cell(i, 2 + j)).collect::<Result<Vec<f64>>>()?;
        let mut psi = Vec::with_capacity(k);
        let mut sigma2 = Vec::with_capacity(k);
        for s in 0..k {
            psi.push(t.cell(i, 2 + d + 2 * s)?);
            sigma2.push(t.cell(i, 3 + d + 2 * s)?);
        }
        a.samples.push(ArchiveSample {
            chain: t.cell(i, 0)?,
            generation: t.cell(i, 1)?,
            theta,
            psi,
            sigma2,
            logp: t.cell(i, 2 + d + 2 * k)?,
        });
    }
    a.validate().map_err(|e| t.err(t.header_line, e.to_string()))?;
    Ok(a)
}

fn band_header(has_process: bool) -> Vec<String> {
    let mut h = vec!["location", "model_lower", "model_median", "model_upper"];
    if has_process {
        h.extend(["process_lower", "process_median", "process_upper"]);
    }
    h.into_iter().map(String::from).collect()
}

pub fn emit_band(b: &PredictiveBand) -> Result<String> {
    check_name(&b.stream)?;
    let mut out = String::new();
    write_meta(&mut out, "stream", &b.stream)?;
    write_meta(&mut out, "probabilities", &join_f64(&b.probabilities))?;
    let m = &b.model;
    let mut cols: Vec<&[f64]> = vec![&b.locations, &m.lower, &m.median, &m.upper];
    if let Some(p) = &b.process {
        cols.extend([p.lower.as_slice(), &p.median, &p.upper]);
    }
    let header = band_header(b.process.is_some());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.push_str(&emit_columns(&header, &cols)?);
    Ok(out)
}

pub fn parse_band(text: &str, source: &str) -> Result<PredictiveBand> {
    let t = Table::parse(text, source)?;
    let has_process = t.header.len() > 4;
    t.expect_header(&band_header(has_process))?;
    let p = t.meta_f64_list("probabilities")?;
    let probabilities: [f64; 3] = p
        .try_into()
        .map_err(|_| t.err(1, "expected three probabilities"))?;
    let band = |prefix: &str| -> Result<QuantileBand> {
        Ok(QuantileBand {
            lower: t.column_f64(&format!("{prefix}_lower"))?,
            median: t.column_f64(&format!("{prefix}_median"))?,
            upper: t.column_f64(&format!("{prefix}_upper"))?,
        })
    };
    Ok(PredictiveBand {
        stream: t.meta("stream")?.to_string(),
        probabilities,
        locations: t.column_f64("location")?,
        model: band("model")?,
        process: if has_process { Some(band("process")?) } else { None },
    })
}

/// Samples of the normalized discrepancy variance and their logarithms, one
/// column pair per stream. Quantiles and ratios follow from the samples.
pub fn emit_discrepancy_summary(s: &DiscrepancySummary) -> Result<String> {
    let mut out = String::new();
    write_meta(&mut out, "probabilities", &join_f64(&s.probabilities))?;
    let names: Vec<String> = s.streams.iter().map(|x| x.stream.clone()).collect();
    for n in &names {
        check_name(n)?;
    }
    write_meta(&mut out, "streams", &names.join(","))?;
    let mut header = Vec::new();
    let mut cols: Vec<&[f64]> = Vec::new();
    for st in &s.streams {
        header.push(format!("sigma2_{}", st.stream));
        header.push(format!("ln_sigma2_{}", st.stream));
        cols.push(&st.sigma2);
        cols.push(&st.ln_sigma2);
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.push_str(&emit_columns(&header, &cols)?);
    Ok(out)
}

pub fn parse_discrepancy_summary(text: &str, source: &str) -> Result<DiscrepancySummary> {
    let t = Table::parse(text, source)?;
    let names = t.meta_list("streams")?;
    let probabilities = t.meta_f64_list("probabilities")?;
    let sigma2 = names
        .iter()
        .map(|n| t.column_f64(&format!("sigma2_{n}")))
        .collect::<Result<Vec<_>>>()?;
    DiscrepancySummary::from_samples(&names, sigma2, &probabilities).map_err(|e| t.err(t.header_line, e.to_string()))
}

fn prob_label(p: f64) -> String {
    format!("q{p}")
}

/// Quantiles of each stream's variance and log variance and of every
/// cross-stream ratio, one row per statistic.
pub fn emit_discrepancy_quantiles(s: &DiscrepancySummary) -> Result<String> {
    let mut out = String::from("statistic,stream");
    for p in &s.probabilities {
        write!(out, ",{}", prob_label(*p)).expect("write to string");
    }
    out.push('\n');
    let mut row = |stat: &str, name: &str, q: &[f64]| {
        out.push_str(&format!("{stat},{name},{}\n", join_f64(q)));
    };
    for st in &s.streams {
        row("sigma2", &st.stream, &st.quantiles);
        row("ln_sigma2", &st.stream, &st.ln_quantiles);
    }
    for r in &s.ratios {
        let name = format!("{}/{}", r.numerator, r.denominator);
        row("ratio", &name, &r.quantiles);
        row("ln_ratio", &name, &r.ln_quantiles);
    }
    Ok(out)
}

fn parameter_header(probabilities: &[f64]) -> Vec<String> {
    let mut h = vec!["parameter".to_string(), "mean".into(), "sd".into()];
    h.extend(probabilities.iter().map(|p| prob_label(*p)));
    h.push("rhat".into());
    h
}

pub fn emit_parameter_summaries(s: &[ParameterSummary], probabilities: &[f64]) -> Result<String> {
    let mut out = String::new();
    write_meta(&mut out, "probabilities", &join_f64(probabilities))?;
    out.push_str(&parameter_header(probabilities).join(","));
    out.push('\n');
    for p in s {
        check_name(&p.name)?;
        if p.quantiles.len() != probabilities.len() {
            return Err(Error::input("quantiles do not match the probabilities"));
        }
        let rhat = p.rhat.map(fmt_f64).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{rhat}",
            p.name,
            fmt_f64(p.mean),
            fmt_f64(p.sd),
            join_f64(&p.quantiles)
        )
        .expect("write to string");
    }
    Ok(out)
}

pub fn parse_parameter_summaries(text: &str, source: &str) -> Result<(Vec<ParameterSummary>, Vec<f64>)> {
    let t = Table::parse(text, source)?;
    let probabilities = t.meta_f64_list("probabilities")?;
    t.expect_header(&parameter_header(&probabilities))?;
    let q = probabilities.len();
    let rows = (0..t.rows.len())
        .map(|i| {
            Ok(ParameterSummary {
                name: t.rows[i][0].clone(),
                mean: t.cell(i, 1)?,
                sd: t.cell(i, 2)?,
                quantiles: (0..q).map(|j| t.cell(i, 3 + j)).collect::<Result<_>>()?,
                rhat: t.optional_f64(i, 3 + q)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, probabilities))
}

fn optimum_header(names: &[String], with_cov: bool) -> Vec<String> {
    let mut h = vec!["parameter".to_string(), "theta_hat".into(), "gradient".into(), "sd".into()];
    h.extend(names.iter().map(|n| format!("hessian_{n}")));
    if with_cov {
        h.extend(names.iter().map(|n| format!("cov_{n}")));
    }
    h
}

/// Optimum, gradient, Hessian and (when available) Laplace covariance, one
/// row per parameter. `extra` metadata is written after the fixed keys.
pub fn emit_optimum(r: &OptimumReport, names: &[String], extra: &[(&str, String)]) -> Result<String> {
    let d = r.theta_hat.len();
    if names.len() != d || r.gradient.len() != d || r.hessian.shape() != (d, d) {
        return Err(Error::input("optimum report does not match the parameter names"));
    }
    for n in names {
        check_name(n)?;
    }
    let mut out = String::new();
    write_meta(&mut out, "converged", &r.converged.to_string())?;
    write_meta(&mut out, "iterations", &r.iterations.to_string())?;
    write_meta(&mut out, "neg_logp", &fmt_f64(r.neg_logp))?;
    write_meta(&mut out, "message", &r.message)?;
    for (k, v) in extra {
        write_meta(&mut out, k, v)?;
    }
    out.push_str(&optimum_header(names, r.laplace_cov.is_some()).join(","));
    out.push('\n');
    for i in 0..d {
        let sd = r.laplace_cov.as_ref().map(|c| fmt_f64(c[(i, i)].sqrt())).unwrap_or_default();
        let mut row = vec![names[i].clone(), fmt_f64(r.theta_hat[i]), fmt_f64(r.gradient[i]), sd];
        row.extend((0..d).map(|j| fmt_f64(r.hessian[(i, j)])));
        if let Some(c) = &r.laplace_cov {
            row.extend((0..d).map(|j| fmt_f64(c[(i, j)])));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_optimum(text: &str, source: &str) -> Result<(OptimumReport, Vec<String>)> {
    let t = Table::parse(text, source)?;
    let names: Vec<String> = t.rows.iter().map(|r| r[0].clone()).collect();
    let d = names.len();
    let with_cov = t.header.len() == 4 + 2 * d;
    t.expect_header(&optimum_header(&names, with_cov))?;
    let matrix = |offset: usize| -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = t.cell(i, offset + j)?;
            }
        }
        Ok(m)
    };
    let report = OptimumReport {
        theta_hat: t.column_f64("theta_hat")?,
        neg_logp: t.meta_parse("neg_logp")?,
        gradient: t.column_f64("gradient")?,
        hessian: matrix(4)?,
        laplace_cov: if with_cov { Some(matrix(4 + d)?) } else { None },
        converged: t.meta_parse("converged")?,
        iterations: t.meta_parse("iterations")?,
        message: t.meta("message")?.to_string(),
    };
    Ok((report, names))
}
