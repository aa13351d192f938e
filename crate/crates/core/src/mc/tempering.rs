//! Parallel tempering over a beta ladder, and the free energy by
//! thermodynamic integration along the same ladder.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::chain::{swap_configurations, CacheBackend, ChainState, Sampler};
use crate::error::{Error, Result};
use crate::model::{Disorder, Hamiltonian, ModelParams};
use crate::observable::{assemble_overlap_statistics, overlap_statistics_observables, Observable, OverlapStatistics};
use crate::patterns::{DisorderSeed, StreamRole};
use crate::stats::{
    integrated_autocorrelation_time, log_two_cosh, mean, quadrature, sample_variance, simpson, EstimateWithError,
    Method,
};

pub const DEFAULT_LADDER_NODES: usize = 33;
/// Chain index whose stream drives replica-exchange decisions.
const EXCHANGE_STREAM: u32 = u32::MAX;
/// Audit threshold for running energies and caches at the end of a run.
pub const AUDIT_TOLERANCE: f64 = 1e-7;

/// `nodes` inverse temperatures from 0 to `beta`: a linear stretch up to
/// beta/8 over the first quarter of the intervals, geometric above it.
pub fn default_ladder(beta: f64, nodes: usize) -> Result<Vec<f64>> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("inverse temperature must be finite and >= 0, got {beta}")));
    }
    if beta == 0.0 {
        return Ok(vec![0.0]);
    }
    if nodes < 3 {
        return Err(Error::Config(format!("a ladder needs at least 3 nodes, got {nodes}")));
    }
    let intervals = nodes - 1;
    let lin = intervals / 4;
    if lin == 0 {
        return Ok((0..nodes).map(|k| beta * k as f64 / intervals as f64).collect());
    }
    let geo = intervals - lin;
    let knee = beta / 8.0;
    let mut ladder: Vec<f64> = (0..=lin).map(|k| knee * k as f64 / lin as f64).collect();
    ladder.extend((1..=geo).map(|k| knee * 8f64.powf(k as f64 / geo as f64)));
    *ladder.last_mut().expect("non-empty") = beta;
    Ok(ladder)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BurnIn {
    /// Run `pilot_sweeps`, estimate the integrated autocorrelation time tau of
    /// every node's energy, and burn in for at least `factor * tau` sweeps.
    Auto { pilot_sweeps: usize, factor: f64 },
    Fixed(usize),
}

impl Default for BurnIn {
    fn default() -> Self {
        BurnIn::Auto {
            pilot_sweeps: 1000,
            factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperingConfig {
    /// Nondecreasing inverse temperatures; the last is the target.
    pub ladder: Vec<f64>,
    pub sweeps_per_exchange: usize,
    pub burn_in: BurnIn,
    pub measurement_sweeps: usize,
    pub n_batches: usize,
    /// Swap acceptance considered healthy; respacing aims for it.
    pub target_window: (f64, f64),
    /// Swap acceptance outside this range raises the warning flag.
    pub warn_window: (f64, f64),
    /// Respace the ladder after the pilot when acceptance leaves the target window.
    pub respace: bool,
    pub backend: CacheBackend,
    /// Keep per-node energy traces of the measurement phase.
    pub record_trace: bool,
}

impl TemperingConfig {
    pub fn new(ladder: Vec<f64>) -> Self {
        Self {
            ladder,
            sweeps_per_exchange: 1,
            burn_in: BurnIn::default(),
            measurement_sweeps: 20_000,
            n_batches: 32,
            target_window: (0.2, 0.4),
            warn_window: (0.05, 0.95),
            respace: false,
            backend: CacheBackend::Auto,
            record_trace: false,
        }
    }

    /// Default ladder ending at `beta`.
    pub fn for_beta(beta: f64) -> Result<Self> {
        Ok(Self::new(default_ladder(beta, DEFAULT_LADDER_NODES)?))
    }

    pub fn validate(&self) -> Result<()> {
        if self.ladder.is_empty() {
            return Err(Error::Config("empty temperature ladder".into()));
        }
        if self.ladder.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::Domain("ladder temperatures must be finite and >= 0".into()));
        }
        if self.ladder.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("ladder must be nondecreasing".into()));
        }
        if self.sweeps_per_exchange == 0 {
            return Err(Error::Config("sweeps_per_exchange must be positive".into()));
        }
        if self.n_batches < 2 || self.measurement_sweeps < self.n_batches {
            return Err(Error::Config(format!(
                "need at least 2 batches and one sweep per batch, got {} sweeps in {} batches",
                self.measurement_sweeps, self.n_batches
            )));
        }
        Ok(())
    }
}

/// Estimates at every ladder node plus run diagnostics.
#[derive(Debug, Clone)]
pub struct TemperingResult {
    /// Ladder actually used (differs from the configured one after respacing).
    pub ladder: Vec<f64>,
    pub observables: Vec<Observable>,
    /// `estimates[node][observable]`, batch-means errors.
    pub estimates: Vec<Vec<EstimateWithError>>,
    /// `batches[node][observable][batch]`.
    pub batches: Vec<Vec<Vec<f64>>>,
    /// Acceptance of swaps between nodes k and k+1.
    pub swap_acceptance: Vec<f64>,
    /// Some pair left the warning window.
    pub swap_warning: bool,
    pub respaced: bool,
    pub burn_in: usize,
    /// Largest energy autocorrelation time seen by the pilot (0 without one).
    pub tau_int: f64,
    /// Worst running-value discrepancy found by the end-of-run audit.
    pub audit: f64,
    pub energy_traces: Option<Vec<Vec<f64>>>,
}

impl TemperingResult {
    /// Estimates at the target (last) node.
    pub fn target(&self) -> &[EstimateWithError] {
        self.estimates.last().expect("ladder is non-empty")
    }
}

struct Replicas<'s, 'a> {
    sampler: &'s Sampler<'a>,
    betas: Vec<f64>,
    chains: Vec<ChainState>,
    exchange_rng: ChaCha8Rng,
    attempts: Vec<u64>,
    accepts: Vec<u64>,
    odd_round: bool,
    since_exchange: usize,
    sweeps_per_exchange: usize,
}

impl<'s, 'a> Replicas<'s, 'a> {
    fn new(sampler: &'s Sampler<'a>, betas: Vec<f64>, seed: DisorderSeed, sweeps_per_exchange: usize) -> Result<Self> {
        let chains = (0..betas.len())
            .map(|k| sampler.new_chain(seed.with_role(StreamRole::McChain(k as u32))))
            .collect::<Result<Vec<_>>>()?;
        let pairs = betas.len().saturating_sub(1);
        Ok(Self {
            sampler,
            betas,
            chains,
            exchange_rng: seed.with_role(StreamRole::McChain(EXCHANGE_STREAM)).rng(),
            attempts: vec![0; pairs],
            accepts: vec![0; pairs],
            odd_round: false,
            since_exchange: 0,
            sweeps_per_exchange,
        })
    }

    fn step(&mut self) {
        for (c, &b) in self.chains.iter_mut().zip(&self.betas) {
            if b == 0.0 {
                self.sampler.infinite_temperature_draw(c);
            } else {
                self.sampler.metropolis_sweep(c, b);
            }
        }
        self.since_exchange += 1;
        if self.since_exchange == self.sweeps_per_exchange {
            self.since_exchange = 0;
            self.exchange();
        }
    }

    /// Attempt swaps on alternating even and odd pairs.
    fn exchange(&mut self) {
        let start = usize::from(self.odd_round);
        self.odd_round = !self.odd_round;
        for k in (start..self.attempts.len()).step_by(2) {
            let log_acc = (self.betas[k + 1] - self.betas[k]) * (self.chains[k + 1].energy() - self.chains[k].energy());
            self.attempts[k] += 1;
            if log_acc >= 0.0 || self.exchange_rng.random::<f64>() < log_acc.exp() {
                self.accepts[k] += 1;
                let (lo, hi) = self.chains.split_at_mut(k + 1);
                swap_configurations(&mut lo[k], &mut hi[0]);
            }
        }
    }

    fn acceptance(&self) -> Vec<f64> {
        self.attempts
            .iter()
            .zip(&self.accepts)
            .map(|(&t, &a)| if t == 0 { 0.0 } else { a as f64 / t as f64 })
            .collect()
    }

    fn reset_counters(&mut self) {
        self.attempts.iter_mut().for_each(|a| *a = 0);
        self.accepts.iter_mut().for_each(|a| *a = 0);
    }

    /// Run `sweeps` steps recording every node's energy.
    fn run_recording(&mut self, sweeps: usize) -> Vec<Vec<f64>> {
        let mut traces = vec![Vec::with_capacity(sweeps); self.chains.len()];
        for _ in 0..sweeps {
            self.step();
            for (t, c) in traces.iter_mut().zip(&self.chains) {
                t.push(c.energy());
            }
        }
        traces
    }
}

/// Move interior nodes so that every interval carries the same share of the
/// cumulative swap cost `-ln(acceptance)`; endpoints are kept.
pub fn respace_ladder(ladder: &[f64], acceptance: &[f64]) -> Vec<f64> {
    if ladder.len() < 3 || acceptance.len() + 1 != ladder.len() {
        return ladder.to_vec();
    }
    let cost: Vec<f64> = acceptance.iter().map(|a| -a.clamp(1e-3, 1.0).ln() + 1e-3).collect();
    let mut cum = vec![0.0];
    for c in &cost {
        cum.push(cum.last().unwrap() + c);
    }
    let total = *cum.last().unwrap();
    let last = ladder.len() - 1;
    let mut out = Vec::with_capacity(ladder.len());
    out.push(ladder[0]);
    let mut seg = 0;
    for k in 1..last {
        let target = total * k as f64 / last as f64;
        while cum[seg + 1] < target {
            seg += 1;
        }
        let frac = (target - cum[seg]) / (cum[seg + 1] - cum[seg]);
        out.push(ladder[seg] + frac * (ladder[seg + 1] - ladder[seg]));
    }
    out.push(ladder[last]);
    out
}

fn outside(acc: &[f64], (lo, hi): (f64, f64)) -> bool {
    acc.iter().any(|a| *a < lo || *a > hi)
}

/// Replica-exchange Monte Carlo on `cfg.ladder`, measuring `observables` at
/// every node. Chain k uses the stream `(seed.master_seed, seed.stream_id,
/// McChain(k))`. Nodes at beta = 0 draw independent exact samples instead of
/// sweeping, which also makes them a perfect reservoir for the ladder.
pub fn parallel_tempering_run(
    cfg: &TemperingConfig,
    disorder: &Disorder,
    p: &ModelParams,
    which: Hamiltonian,
    observables: &[Observable],
    seed: DisorderSeed,
) -> Result<TemperingResult> {
    cfg.validate()?;
    let sampler = Sampler::new(disorder, p, which, cfg.backend)?;
    sampler.check_observables(observables)?;

    let mut ladder = cfg.ladder.clone();
    let mut respaced = false;
    let mut reps = Replicas::new(&sampler, ladder.clone(), seed, cfg.sweeps_per_exchange)?;
    let mut tau_int: f64 = 0.0;
    let burn_in = match cfg.burn_in {
        BurnIn::Fixed(n) => {
            for _ in 0..n {
                reps.step();
            }
            n
        }
        BurnIn::Auto { pilot_sweeps, factor } => {
            let mut traces = reps.run_recording(pilot_sweeps);
            let mut done = pilot_sweeps;
            if cfg.respace && outside(&reps.acceptance(), cfg.target_window) {
                ladder = respace_ladder(&ladder, &reps.acceptance());
                reps.betas = ladder.clone();
                reps.reset_counters();
                respaced = true;
                traces = reps.run_recording(pilot_sweeps);
                done += pilot_sweeps;
            }
            tau_int = traces
                .iter()
                .map(|t| integrated_autocorrelation_time(&t[t.len() / 2..]))
                .fold(0.0, f64::max);
            let wanted = (factor * tau_int).ceil() as usize;
            for _ in pilot_sweeps..wanted {
                reps.step();
                done += 1;
            }
            done
        }
    };
    reps.reset_counters();

    let nodes = ladder.len();
    let n_obs = observables.len();
    let batch_len = cfg.measurement_sweeps / cfg.n_batches;
    let mut batches = vec![vec![Vec::with_capacity(cfg.n_batches); n_obs]; nodes];
    let mut sums = vec![vec![0.0; n_obs]; nodes];
    let mut traces = cfg.record_trace.then(|| vec![Vec::with_capacity(batch_len * cfg.n_batches); nodes]);
    for _ in 0..cfg.n_batches {
        for _ in 0..batch_len {
            reps.step();
            for (k, c) in reps.chains.iter().enumerate() {
                let v = sampler.view(c);
                for (s, o) in sums[k].iter_mut().zip(observables) {
                    *s += o.eval(&v);
                }
                if let Some(t) = traces.as_mut() {
                    t[k].push(c.energy());
                }
            }
        }
        for k in 0..nodes {
            for (j, s) in sums[k].iter_mut().enumerate() {
                batches[k][j].push(*s / batch_len as f64);
                *s = 0.0;
            }
        }
    }

    let n_samples = batch_len * cfg.n_batches;
    let estimates = batches
        .iter()
        .map(|node| {
            node.iter()
                .map(|b| {
                    let se = (sample_variance(b) / b.len() as f64).sqrt();
                    EstimateWithError::new(mean(b), se, n_samples, Method::BatchMeans)
                })
                .collect()
        })
        .collect();

    let audit = reps.chains.iter().map(|c| sampler.audit(c)).fold(0.0, f64::max);
    if audit > AUDIT_TOLERANCE {
        log::warn!("running energies drifted by {audit:.3e} (tolerance {AUDIT_TOLERANCE:e})");
    }
    let swap_acceptance = reps.acceptance();
    let swap_warning = outside(&swap_acceptance, cfg.warn_window);
    if swap_warning {
        log::warn!("swap acceptance left {:?}; consider respacing the ladder", cfg.warn_window);
    }
    Ok(TemperingResult {
        ladder,
        observables: observables.to_vec(),
        estimates,
        batches,
        swap_acceptance,
        swap_warning,
        respaced,
        burn_in,
        tau_int,
        audit,
        energy_traces: traces,
    })
}

/// Free energy from F(0, B) = log(2 cosh B) plus the Simpson integral of
/// <-H/N> over the ladder.
#[derive(Debug, Clone)]
pub struct ThermoIntegration {
    /// Combined estimate; its error folds statistical and truncation parts in
    /// quadrature.
    pub estimate: EstimateWithError,
    pub statistical_error: f64,
    /// |S_full - S_half| / 15 from the half-resolution grid.
    pub truncation_error: f64,
    pub ladder: Vec<f64>,
    /// <-H/N> at each node.
    pub integrand: Vec<EstimateWithError>,
    pub run: Option<TemperingResult>,
}

fn check_grid(ladder: &[f64], beta: f64) -> Result<()> {
    if ladder.first() != Some(&0.0) {
        return Err(Error::Domain("thermodynamic integration grid must start at beta = 0".into()));
    }
    let last = *ladder.last().expect("non-empty");
    if (last - beta).abs() > 1e-12 * beta.max(1.0) {
        return Err(Error::Domain(format!("grid ends at {last} but the target is beta = {beta}")));
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("thermodynamic integration grid must be strictly increasing".into()));
    }
    if ladder.len() < 3 || ladder.len().is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "thermodynamic integration needs an odd number (>= 3) of nodes, got {}",
            ladder.len()
        )));
    }
    Ok(())
}

pub fn thermo_integration_free_energy(
    disorder: &Disorder,
    p: &ModelParams,
    which: Hamiltonian,
    cfg: &TemperingConfig,
    seed: DisorderSeed,
) -> Result<ThermoIntegration> {
    let anchor = log_two_cosh(p.field);
    if p.beta == 0.0 {
        return Ok(ThermoIntegration {
            estimate: EstimateWithError::exact(anchor),
            statistical_error: 0.0,
            truncation_error: 0.0,
            ladder: vec![0.0],
            integrand: Vec::new(),
            run: None,
        });
    }
    cfg.validate()?;
    check_grid(&cfg.ladder, p.beta)?;
    let run = parallel_tempering_run(cfg, disorder, p, which, &[Observable::EnergyPerSite], seed)?;
    let ladder = run.ladder.clone();
    let integrand: Vec<EstimateWithError> = run
        .estimates
        .iter()
        .map(|e| EstimateWithError { mean: -e[0].mean, ..e[0] })
        .collect();
    let y: Vec<f64> = integrand.iter().map(|e| e.mean).collect();
    let full = simpson(&ladder, &y)?;

    // Integrating each batch separately keeps the covariance between nodes.
    let per_batch = (0..cfg.n_batches)
        .map(|b| {
            let yb: Vec<f64> = run.batches.iter().map(|node| -node[0][b]).collect();
            simpson(&ladder, &yb)
        })
        .collect::<Result<Vec<f64>>>()?;
    let statistical_error = (sample_variance(&per_batch) / per_batch.len() as f64).sqrt();

    let half_x: Vec<f64> = ladder.iter().step_by(2).copied().collect();
    let half_y: Vec<f64> = y.iter().step_by(2).copied().collect();
    let truncation_error = if half_x.len() >= 3 && half_x.len() % 2 == 1 {
        (full - simpson(&half_x, &half_y)?).abs() / 15.0
    } else {
        0.0
    };
    let estimate = EstimateWithError::new(
        anchor + full,
        quadrature(&[statistical_error, truncation_error]),
        run.estimates[0][0].n_samples,
        Method::ThermoIntegration,
    );
    Ok(ThermoIntegration {
        estimate,
        statistical_error,
        truncation_error,
        ladder,
        integrand,
        run: Some(run),
    })
}

/// Sampled overlap moments, tail and exponential moment at the target
/// temperature, the last node of `cfg.ladder`.
pub fn mc_overlap_statistics(
    disorder: &Disorder,
    p: &ModelParams,
    which: Hamiltonian,
    cfg: &TemperingConfig,
    seed: DisorderSeed,
    c: f64,
    r_max: usize,
) -> Result<OverlapStatistics<EstimateWithError>> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("exponential-moment coefficient must be >= 0, got {c}")));
    }
    let last = cfg.ladder.last().copied().unwrap_or(f64::NAN);
    if (last - p.beta).abs() > 1e-12 * p.beta.max(1.0) {
        return Err(Error::Domain(format!("ladder ends at {last} but the target is beta = {}", p.beta)));
    }
    let obs = overlap_statistics_observables(c, r_max);
    let run = parallel_tempering_run(cfg, disorder, p, which, &obs, seed)?;
    Ok(assemble_overlap_statistics(run.target(), c))
}
