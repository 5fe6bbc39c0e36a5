//! Multi-chain block-at-a-time sampler: per-stream correlation length
//! (Metropolis, DEMC in log space), per-stream discrepancy variance (Gibbs)
//! and model parameters (Metropolis, DEMC).

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::archive::{ArchiveSample, PosteriorArchive, Scenario};
use super::demc::{demc_propose, draw_gamma, metropolis_accept, JITTER_RELATIVE};
use super::density::{log_density_ignore_at, stream_terms, GpHyperState, StreamTerms};
use super::gibbs::gibbs_sigma2;
use super::priors::Priors;
use crate::error::{Error, Result};
use crate::gp::{correlation_matrix, psi_truncation_bounds, select_supporting_points, KernelParams, SupportSelection};
use crate::models::ForwardModel;
use crate::stream::ObservationStream;

const INIT_ATTEMPTS: usize = 100;

/// Cycles between additions of the current chain states to the history.
pub const HISTORY_INTERVAL: usize = 10;

/// Initial history size per population, per state dimension.
const HISTORY_INIT_PER_DIM: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub chains: usize,
    pub populations: usize,
    pub cycles: usize,
    /// Defaults to half the cycles.
    pub burn_in: Option<usize>,
    pub thinning: usize,
    pub seed: u64,
    /// Box for drawing initial parameters when the prior is unbounded.
    pub init_box: Option<Vec<(f64, f64)>>,
    /// Initial normalized discrepancy variance; defaults to the prior mode.
    pub sigma2_init: Option<f64>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            chains: 8,
            populations: 2,
            cycles: 4000,
            burn_in: None,
            thinning: 4,
            seed: 1,
            init_box: None,
            sigma2_init: None,
        }
    }
}

impl SamplerConfig {
    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.cycles / 2)
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        let min_chains = 4.max(dimension + 1);
        if self.chains < min_chains {
            return Err(Error::config(format!(
                "need at least {min_chains} chains for {dimension} parameters, got {}",
                self.chains
            )));
        }
        if self.populations == 0 {
            return Err(Error::config("populations must be at least 1"));
        }
        if self.chains / self.populations < 3 {
            return Err(Error::config(format!(
                "{} chains in {} populations leaves fewer than 3 chains per population",
                self.chains, self.populations
            )));
        }
        if self.thinning == 0 {
            return Err(Error::config("thinning interval must be at least 1"));
        }
        if let Some(v) = self.sigma2_init {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config("sigma2_init must be positive"));
            }
        }
        if let Some(b) = &self.init_box {
            if b.len() != dimension || b.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
                return Err(Error::config("init_box must give finite (low, high) per parameter"));
            }
        }
        Ok(())
    }

    /// Population of a chain; populations are contiguous blocks of chains.
    pub fn population_of(&self, chain: usize) -> usize {
        chain * self.populations / self.chains
    }
}

/// Per-stream GP state of a chain.
#[derive(Debug, Clone)]
pub struct StreamState {
    pub hyper: GpHyperState,
    pub support: SupportSelection,
    pub terms: StreamTerms,
}

/// Current state of one chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub theta: Vec<f64>,
    pub predictions: Vec<Vec<f64>>,
    /// Empty under the ignore scenario.
    pub streams: Vec<StreamState>,
    /// Scenario log density at the current state.
    pub logp: f64,
}

impl ChainState {
    fn recompute_logp(&mut self, priors: &Priors, streams: &[ObservationStream]) {
        let prior = priors.ln_theta(&self.theta);
        self.logp = if self.streams.is_empty() {
            log_density_ignore_at(streams, &self.predictions) + prior
        } else {
            self.streams.iter().map(|s| s.terms.total()).sum::<f64>() + prior
        };
    }
}

#[derive(Debug, Clone, Default)]
struct AcceptCounts {
    theta: (usize, usize),
    psi: (usize, usize),
}

/// Past states per population, the pool from which proposal differences are
/// drawn. It is read-only during a cycle and extended between cycles.
struct History {
    theta: Vec<Vec<Vec<f64>>>,
    /// Population, then stream, then one-element states.
    log_psi: Vec<Vec<Vec<Vec<f64>>>>,
}

impl History {
    fn new(ctx: &Context<'_>, states: &[ChainState], init_box: &[(f64, f64)], rng: &mut ChaCha8Rng) -> Self {
        let pops = ctx.config.populations;
        let d = init_box.len();
        let mut theta = vec![Vec::new(); pops];
        let mut log_psi = vec![vec![Vec::new(); states[0].streams.len()]; pops];
        for (c, s) in states.iter().enumerate() {
            let p = ctx.config.population_of(c);
            theta[p].push(s.theta.clone());
            for (k, st) in s.streams.iter().enumerate() {
                log_psi[p][k].push(vec![st.hyper.psi.ln()]);
            }
        }
        for p in 0..pops {
            while theta[p].len() < HISTORY_INIT_PER_DIM * d {
                theta[p].push(init_box.iter().map(|&(lo, hi)| if hi > lo { rng.random_range(lo..hi) } else { lo }).collect());
            }
            for (k, hist) in log_psi[p].iter_mut().enumerate() {
                let centre = (ctx.streams[k].locations.range() / 3.0).ln();
                while hist.len() < HISTORY_INIT_PER_DIM {
                    hist.push(vec![centre + rng.random_range(-0.5..0.5)]);
                }
            }
        }
        History { theta, log_psi }
    }

    fn record(&mut self, ctx: &Context<'_>, states: &[ChainState]) {
        for (c, s) in states.iter().enumerate() {
            let p = ctx.config.population_of(c);
            self.theta[p].push(s.theta.clone());
            for (k, st) in s.streams.iter().enumerate() {
                self.log_psi[p][k].push(vec![st.hyper.psi.ln()]);
            }
        }
    }
}

struct Context<'a> {
    config: &'a SamplerConfig,
    priors: &'a Priors,
    model: &'a dyn ForwardModel,
    streams: &'a [ObservationStream],
    scenario: Scenario,
    jitter: Vec<f64>,
}

/// Runs the sampler and returns the thinned post-burn-in archive.
pub fn run_sampler(
    config: &SamplerConfig,
    priors: &Priors,
    model: &dyn ForwardModel,
    streams: &[ObservationStream],
    scenario: Scenario,
) -> Result<PosteriorArchive> {
    let d = model.dimension();
    config.validate(d)?;
    priors.validate()?;
    if streams.len() != model.stream_names().len() {
        return Err(Error::config(format!(
            "model expects {} streams, got {}",
            model.stream_names().len(),
            streams.len()
        )));
    }
    if scenario == Scenario::Gp {
        if priors.psi.len() != streams.len() {
            return Err(Error::config("one correlation-length prior per stream is required"));
        }
        if let Some(s) = streams.iter().find(|s| s.len() < 2) {
            return Err(Error::config(format!("stream '{}' needs at least 2 locations for a GP", s.name)));
        }
    }
    let init_box = config
        .init_box
        .clone()
        .or_else(|| priors.theta_bounds.clone())
        .ok_or_else(|| Error::config("parameter prior is unbounded; an init_box is required"))?;
    if init_box.len() != d {
        return Err(Error::config("parameter bounds do not match the model dimension"));
    }
    let jitter = init_box
        .iter()
        .map(|(lo, hi)| JITTER_RELATIVE * (hi - lo).max(f64::MIN_POSITIVE))
        .collect();
    let ctx = Context {
        config,
        priors,
        model,
        streams,
        scenario,
        jitter,
    };

    let mut rngs: Vec<ChaCha8Rng> = (0..config.chains)
        .map(|c| {
            let mut r = ChaCha8Rng::seed_from_u64(config.seed);
            r.set_stream(c as u64);
            r
        })
        .collect();
    let init: Vec<Result<Option<ChainState>>> = rngs
        .iter_mut()
        .map(|rng| initialize_chain(&ctx, &init_box, rng))
        .collect();
    let mut states = Vec::with_capacity(config.chains);
    for r in init {
        states.push(r?);
    }
    if states.iter().all(Option::is_none) {
        return Err(Error::Initialization(format!(
            "no chain reached a finite log density after {INIT_ATTEMPTS} draws from {init_box:?}"
        )));
    }
    // chains that failed to initialize start from another chain's state and
    // diverge through their own proposals
    let fallback = states.iter().flatten().next().cloned().expect("at least one chain");
    let mut states: Vec<ChainState> = states.into_iter().map(|s| s.unwrap_or_else(|| fallback.clone())).collect();

    let mut history_rng = ChaCha8Rng::seed_from_u64(config.seed);
    history_rng.set_stream(config.chains as u64);
    let mut history = History::new(&ctx, &states, &init_box, &mut history_rng);

    let burn_in = config.burn_in();
    let mut samples = Vec::new();
    let mut counts = vec![AcceptCounts::default(); config.chains];
    for cycle in 0..config.cycles {
        let results = step_all(&ctx, &history, &mut states, &mut rngs, &mut counts);
        for r in results {
            r?;
        }
        if (cycle + 1) % HISTORY_INTERVAL == 0 {
            history.record(&ctx, &states);
        }
        if cycle >= burn_in && (cycle - burn_in).is_multiple_of(config.thinning) {
            for (chain, s) in states.iter().enumerate() {
                samples.push(ArchiveSample {
                    chain,
                    generation: cycle,
                    theta: s.theta.clone(),
                    psi: s.streams.iter().map(|k| k.hyper.psi).collect(),
                    sigma2: s.streams.iter().map(|k| k.hyper.sigma2_norm).collect(),
                    logp: s.logp,
                });
            }
        }
    }
    for (c, a) in counts.iter().enumerate() {
        debug!(
            "chain {c}: theta accepted {}/{}, psi accepted {}/{}",
            a.theta.0, a.theta.1, a.psi.0, a.psi.1
        );
    }
    let theta_acc: usize = counts.iter().map(|a| a.theta.0).sum();
    let theta_tot: usize = counts.iter().map(|a| a.theta.1).sum();
    if theta_tot > 0 {
        info!("parameter acceptance rate {:.3}", theta_acc as f64 / theta_tot as f64);
    }

    Ok(PosteriorArchive {
        scenario,
        model: String::new(),
        parameter_names: model.parameter_names(),
        stream_names: streams.iter().map(|s| s.name.clone()).collect(),
        stream_noise: streams.iter().map(ObservationStream::mean_sigma2_eps).collect(),
        chains: config.chains,
        populations: config.populations,
        cycles: config.cycles,
        burn_in,
        thinning: config.thinning,
        seed: config.seed,
        config_fingerprint: fingerprint(config, priors, streams, scenario),
        samples,
    })
}

#[cfg(feature = "parallel")]
fn step_all(
    ctx: &Context<'_>,
    history: &History,
    states: &mut [ChainState],
    rngs: &mut [ChaCha8Rng],
    counts: &mut [AcceptCounts],
) -> Vec<Result<()>> {
    use rayon::prelude::*;
    states
        .par_iter_mut()
        .zip(rngs.par_iter_mut())
        .zip(counts.par_iter_mut())
        .enumerate()
        .map(|(c, ((s, r), a))| step_chain(ctx, history, c, s, r, a))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn step_all(
    ctx: &Context<'_>,
    history: &History,
    states: &mut [ChainState],
    rngs: &mut [ChaCha8Rng],
    counts: &mut [AcceptCounts],
) -> Vec<Result<()>> {
    states
        .iter_mut()
        .zip(rngs.iter_mut())
        .zip(counts.iter_mut())
        .enumerate()
        .map(|(c, ((s, r), a))| step_chain(ctx, history, c, s, r, a))
        .collect()
}

/// Treats a singular covariance as a rejected proposal.
fn or_reject<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ Error::Singular { .. }) => {
            debug!("proposal rejected: {e}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn initialize_chain(ctx: &Context<'_>, init_box: &[(f64, f64)], rng: &mut ChaCha8Rng) -> Result<Option<ChainState>> {
    for _ in 0..INIT_ATTEMPTS {
        let theta: Vec<f64> = init_box
            .iter()
            .map(|&(lo, hi)| if hi > lo { rng.random_range(lo..hi) } else { lo })
            .collect();
        let predictions = ctx.model.evaluate(&theta)?;
        let mut gp = Vec::new();
        if ctx.scenario == Scenario::Gp {
            for (k, stream) in ctx.streams.iter().enumerate() {
                let psi = stream.locations.range() / 3.0 * rng.random_range(-0.5..0.5f64).exp();
                let hyper = GpHyperState {
                    psi,
                    sigma2_norm: ctx.config.sigma2_init.unwrap_or_else(|| ctx.priors.sigma2.mode()),
                };
                let support = select_supporting_points(&stream.locations, psi, rng)?;
                let Some(terms) = or_reject(stream_terms(stream, &predictions[k], &hyper.kernel(stream)?, &support))?
                else {
                    break;
                };
                gp.push(StreamState { hyper, support, terms });
            }
            if gp.len() != ctx.streams.len() {
                continue;
            }
        }
        let mut state = ChainState {
            theta,
            predictions,
            streams: gp,
            logp: f64::NAN,
        };
        state.recompute_logp(ctx.priors, ctx.streams);
        if state.logp.is_finite() {
            return Ok(Some(state));
        }
    }
    Ok(None)
}

fn step_chain(
    ctx: &Context<'_>,
    history: &History,
    chain: usize,
    state: &mut ChainState,
    rng: &mut ChaCha8Rng,
    counts: &mut AcceptCounts,
) -> Result<()> {
    if ctx.scenario == Scenario::Gp {
        for k in 0..ctx.streams.len() {
            psi_block(ctx, history, chain, k, state, rng, counts)?;
        }
        for k in 0..ctx.streams.len() {
            sigma2_block(ctx, k, state, rng)?;
        }
        state.recompute_logp(ctx.priors, ctx.streams);
    }
    theta_block(ctx, history, chain, state, rng, counts)
}

fn psi_block(
    ctx: &Context<'_>,
    history: &History,
    chain: usize,
    k: usize,
    state: &mut ChainState,
    rng: &mut ChaCha8Rng,
    counts: &mut AcceptCounts,
) -> Result<()> {
    let stream = &ctx.streams[k];
    let prior = &ctx.priors.psi[k];
    let current = &state.streams[k];
    let pop = &history.log_psi[ctx.config.population_of(chain)][k];
    let cur_ln = current.hyper.psi.ln();
    let (lower, upper) = psi_truncation_bounds(&stream.locations, &current.support)?;
    let jitter = [JITTER_RELATIVE * (upper / lower).ln().abs().max(f64::EPSILON)];
    let gamma = draw_gamma(1, rng);
    let prop_ln = demc_propose(&[cur_ln], None, pop, gamma, &jitter, rng)?[0];
    let psi = prop_ln.exp();
    counts.psi.1 += 1;

    // density in ln psi carries the Jacobian psi
    let current_value = current.terms.total() + prior.ln_density(current.hyper.psi) + cur_ln;
    if !(psi.is_finite() && psi > 0.0 && psi <= stream.locations.range()) {
        rng.random::<f64>();
        return Ok(());
    }
    let support = select_supporting_points(&stream.locations, psi, rng)?;
    let (lo, hi) = psi_truncation_bounds(&stream.locations, &support)?;
    let sigma2_d = current.hyper.sigma2_d(stream);
    let terms = if psi >= lo && psi <= hi {
        or_reject(KernelParams::new(psi, sigma2_d).and_then(|p| stream_terms(stream, &state.predictions[k], &p, &support)))?
    } else {
        None
    };
    let proposed_value = match &terms {
        Some(t) => t.total() + prior.ln_density(psi) + prop_ln,
        None => f64::NEG_INFINITY,
    };
    if metropolis_accept(current_value, proposed_value, rng) {
        let terms = terms.expect("accepted proposal has finite density");
        let s = &mut state.streams[k];
        s.hyper.psi = psi;
        s.support = support;
        s.terms = terms;
        counts.psi.0 += 1;
    }
    Ok(())
}

fn sigma2_block(ctx: &Context<'_>, k: usize, state: &mut ChainState, rng: &mut ChaCha8Rng) -> Result<()> {
    let stream = &ctx.streams[k];
    let s = &state.streams[k];
    let locs = stream.locations.subset(&s.support.support);
    let lambda = correlation_matrix(&locs, &locs, s.hyper.psi)?;
    let Some(sigma2) = or_reject(gibbs_sigma2(
        &s.terms.estimate.delta_s,
        &lambda,
        stream.mean_sigma2_eps(),
        &ctx.priors.sigma2,
        rng,
    ))?
    else {
        return Ok(());
    };
    let hyper = GpHyperState {
        psi: s.hyper.psi,
        sigma2_norm: sigma2,
    };
    let Some(terms) = or_reject(
        KernelParams::new(hyper.psi, hyper.sigma2_d(stream))
            .and_then(|p| stream_terms(stream, &state.predictions[k], &p, &s.support)),
    )?
    else {
        return Ok(());
    };
    let s = &mut state.streams[k];
    s.hyper = hyper;
    s.terms = terms;
    Ok(())
}

fn theta_block(
    ctx: &Context<'_>,
    history: &History,
    chain: usize,
    state: &mut ChainState,
    rng: &mut ChaCha8Rng,
    counts: &mut AcceptCounts,
) -> Result<()> {
    let pop = &history.theta[ctx.config.population_of(chain)];
    let gamma = draw_gamma(state.theta.len(), rng);
    let proposal = demc_propose(&state.theta, None, pop, gamma, &ctx.jitter, rng)?;
    counts.theta.1 += 1;
    let prior = ctx.priors.ln_theta(&proposal);
    if prior == f64::NEG_INFINITY {
        rng.random::<f64>();
        return Ok(());
    }
    let predictions = ctx.model.evaluate(&proposal)?;
    let (value, terms) = match ctx.scenario {
        Scenario::Ignore => (log_density_ignore_at(ctx.streams, &predictions) + prior, Vec::new()),
        Scenario::Gp => {
            let mut terms = Vec::with_capacity(ctx.streams.len());
            for (k, stream) in ctx.streams.iter().enumerate() {
                let s = &state.streams[k];
                match or_reject(s.hyper.kernel(stream).and_then(|p| stream_terms(stream, &predictions[k], &p, &s.support)))? {
                    Some(t) => terms.push(t),
                    None => break,
                }
            }
            if terms.len() == ctx.streams.len() {
                (terms.iter().map(StreamTerms::total).sum::<f64>() + prior, terms)
            } else {
                (f64::NEG_INFINITY, Vec::new())
            }
        }
    };
    if metropolis_accept(state.logp, value, rng) {
        state.theta = proposal;
        state.predictions = predictions;
        for (s, t) in state.streams.iter_mut().zip(terms) {
            s.terms = t;
        }
        state.logp = value;
        counts.theta.0 += 1;
    }
    Ok(())
}

/// Short hash identifying the sampler settings, priors and data of a run.
pub fn fingerprint(config: &SamplerConfig, priors: &Priors, streams: &[ObservationStream], scenario: Scenario) -> String {
    let mut h = Sha256::new();
    h.update(format!("{scenario}|{config:?}|{priors:?}").as_bytes());
    for s in streams {
        h.update(s.name.as_bytes());
        for v in s.locations.as_slice().iter().chain(&s.observations).chain(&s.sigma2_eps) {
            h.update(v.to_le_bytes());
        }
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::density::log_density_gp;
    use crate::models::{linear_gaussian_test_model, BasicExampleConfig, generate_synthetic_data};
    use nalgebra::DMatrix;

    #[test]
    fn chain_count_validation() {
        let c = SamplerConfig {
            chains: 3,
            ..Default::default()
        };
        assert!(matches!(c.validate(2), Err(Error::Config(_))));
        let c = SamplerConfig {
            chains: 4,
            populations: 2,
            ..Default::default()
        };
        assert!(c.validate(2).is_err());
        assert!(SamplerConfig::default().validate(2).is_ok());
        assert!(SamplerConfig::default().validate(8).is_err());
    }

    #[test]
    fn populations_are_contiguous() {
        let c = SamplerConfig::default();
        let pops: Vec<usize> = (0..8).map(|i| c.population_of(i)).collect();
        assert_eq!(pops, vec![0, 0, 0, 0, 1, 1, 1, 1]);
    }

    fn linear_problem() -> (crate::models::LinearGaussianModel, ObservationStream, Priors) {
        let m = linear_gaussian_test_model(DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0])).unwrap();
        let s = ObservationStream::new("y", vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.2], vec![0.04]).unwrap();
        let p = Priors {
            psi: vec![],
            sigma2: Default::default(),
            theta_bounds: Some(vec![(-5.0, 5.0), (-5.0, 5.0)]),
        };
        (m, s, p)
    }

    #[test]
    fn zero_cycles_give_empty_archive() {
        let (m, s, p) = linear_problem();
        let cfg = SamplerConfig {
            cycles: 0,
            ..Default::default()
        };
        let a = run_sampler(&cfg, &p, &m, &[s], Scenario::Ignore).unwrap();
        assert!(a.is_empty());
        assert_eq!(a.chains, 8);
        assert_eq!(a.burn_in, 0);
        assert!(a.validate().is_ok());
    }

    #[test]
    fn unbounded_prior_needs_init_box() {
        let (m, s, mut p) = linear_problem();
        p.theta_bounds = None;
        let cfg = SamplerConfig {
            cycles: 10,
            ..Default::default()
        };
        assert!(matches!(run_sampler(&cfg, &p, &m, &[s], Scenario::Ignore), Err(Error::Config(_))));
    }

    #[test]
    fn identical_seeds_are_bit_identical() {
        let (m, s, p) = linear_problem();
        let cfg = SamplerConfig {
            cycles: 200,
            seed: 9,
            ..Default::default()
        };
        let a = run_sampler(&cfg, &p, &m, std::slice::from_ref(&s), Scenario::Ignore).unwrap();
        let b = run_sampler(&cfg, &p, &m, &[s], Scenario::Ignore).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples.len(), 8 * 25);
    }

    #[test]
    fn cached_logp_and_psi_bounds_hold_on_basic_example() {
        let cfg = BasicExampleConfig {
            n_rich: 200,
            ..Default::default()
        };
        let data = generate_synthetic_data(&cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let streams = data.streams().unwrap();
        let model = data.model();
        let priors = Priors::for_streams(&streams, Some(vec![(0.0, 3.0), (0.0, 6.0)])).unwrap();
        let scfg = SamplerConfig {
            cycles: 60,
            burn_in: Some(0),
            thinning: 1,
            seed: 5,
            ..Default::default()
        };
        let ctx = Context {
            config: &scfg,
            priors: &priors,
            model: &model,
            streams: &streams,
            scenario: Scenario::Gp,
            jitter: vec![1e-6; 2],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bounds = priors.theta_bounds.clone().unwrap();
        let mut states: Vec<ChainState> = (0..8)
            .map(|_| initialize_chain(&ctx, &bounds, &mut rng).unwrap().unwrap())
            .collect();
        let mut rngs: Vec<ChaCha8Rng> = (0..8).map(ChaCha8Rng::seed_from_u64).collect();
        let mut counts = vec![AcceptCounts::default(); 8];
        let mut history = History::new(&ctx, &states, &bounds, &mut rng);
        for cycle in 0..60 {
            for r in step_all(&ctx, &history, &mut states, &mut rngs, &mut counts) {
                r.unwrap();
            }
            if cycle % HISTORY_INTERVAL == 0 {
                history.record(&ctx, &states);
            }
            for s in &states {
                let hyper: Vec<GpHyperState> = s.streams.iter().map(|k| k.hyper).collect();
                let supports: Vec<SupportSelection> = s.streams.iter().map(|k| k.support.clone()).collect();
                let fresh = log_density_gp(&s.theta, &hyper, &supports, &streams, &model, &priors).unwrap();
                assert!((fresh - s.logp).abs() <= 1e-9 * fresh.abs().max(1.0), "{fresh} vs {}", s.logp);
                for (k, st) in s.streams.iter().enumerate() {
                    let (lo, hi) = psi_truncation_bounds(&streams[k].locations, &st.support).unwrap();
                    assert!(st.hyper.psi >= lo && st.hyper.psi <= hi);
                }
            }
        }
        assert!(counts.iter().map(|c| c.psi.0).sum::<usize>() > 0);
        assert!(counts.iter().map(|c| c.theta.0).sum::<usize>() > 0);
    }
}
