//! Experiment drivers built on the engines. Each driver is a pure function of
//! its configuration: realization `r` always uses stream id `r` under the
//! master seed, whatever the worker count.

mod concentration;
mod interpolation;
mod overlap;
mod theorem1;

pub use concentration::{run_concentration, ConcentrationConfig, ConcentrationFit, ConcentrationRow};
pub use interpolation::{
    run_hopfield_stein_check, run_interpolation_scan, run_stein_check, HopfieldSteinConfig, HopfieldSteinReport,
    HopfieldSteinRow, InterpolationConfig, InterpolationScan, InterpolationRow, SteinCheck, SteinConfig,
};
pub use overlap::{run_exp_moment, run_overlap_tail, ExpMomentConfig, ExpMomentReport, ExpMomentRow, OverlapTailConfig, TailFit};
pub use theorem1::{
    run_figure1, run_theorem1, Figure1Config, Figure1Data, Figure1Panel, Figure1Point, ResidualRow, ResidualTable,
    Theorem1Config,
};

use crate::error::{Error, Result};
use crate::exact::{exact_log_partition, exact_overlap_statistics, ExactOptions};
use crate::mc::{default_ladder, mc_overlap_statistics, thermo_integration_free_energy, BurnIn, TemperingConfig};
use crate::model::{Disorder, Hamiltonian, ModelParams};
use crate::observable::OverlapStatistics;
use crate::patterns::{gen_couplings, gen_patterns, DisorderSeed, PatternDistribution, StreamRole};

/// Monte Carlo knobs; the ladder is rebuilt for each target temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub ladder_nodes: usize,
    pub measurement_sweeps: usize,
    pub burn_in: BurnIn,
    pub sweeps_per_exchange: usize,
    pub n_batches: usize,
    pub respace: bool,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            ladder_nodes: crate::mc::DEFAULT_LADDER_NODES,
            measurement_sweeps: 20_000,
            burn_in: BurnIn::default(),
            sweeps_per_exchange: 1,
            n_batches: 32,
            respace: false,
        }
    }
}

impl McSettings {
    pub fn tempering(&self, beta: f64) -> Result<TemperingConfig> {
        let mut cfg = TemperingConfig::new(default_ladder(beta, self.ladder_nodes)?);
        cfg.measurement_sweeps = self.measurement_sweeps;
        cfg.burn_in = self.burn_in;
        cfg.sweeps_per_exchange = self.sweeps_per_exchange;
        cfg.n_batches = self.n_batches;
        cfg.respace = self.respace;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Engine {
    Exact(ExactOptions),
    MonteCarlo(McSettings),
}

impl Default for Engine {
    fn default() -> Self {
        Engine::Exact(ExactOptions::default())
    }
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Exact(_) => "exact",
            Engine::MonteCarlo(_) => "mc",
        }
    }

    /// Free energy of one realization (thermodynamic integration for MC).
    pub fn free_energy(&self, d: &Disorder, p: &ModelParams, which: Hamiltonian, chain_seed: DisorderSeed) -> Result<f64> {
        match self {
            Engine::Exact(opts) => Ok(exact_log_partition(d, p, which, opts)?.free_energy),
            Engine::MonteCarlo(s) => {
                let cfg = s.tempering(p.beta)?;
                Ok(thermo_integration_free_energy(d, p, which, &cfg, chain_seed)?.estimate.mean)
            }
        }
    }

    pub fn overlap_statistics(
        &self,
        d: &Disorder,
        p: &ModelParams,
        c: f64,
        r_max: usize,
        chain_seed: DisorderSeed,
    ) -> Result<OverlapStatistics> {
        match self {
            Engine::Exact(opts) => exact_overlap_statistics(d, p, Hamiltonian::Hopfield, c, r_max, opts),
            Engine::MonteCarlo(s) => {
                let cfg = s.tempering(p.beta)?;
                let st = mc_overlap_statistics(d, p, Hamiltonian::Hopfield, &cfg, chain_seed, c, r_max)?;
                Ok(OverlapStatistics {
                    moments: st.moments.map(|e| e.mean),
                    tail: st.tail.iter().map(|e| e.mean).collect(),
                    c,
                    exp_moment: st.exp_moment.mean,
                })
            }
        }
    }

    fn require_exact(&self, what: &str) -> Result<&ExactOptions> {
        match self {
            Engine::Exact(o) => Ok(o),
            Engine::MonteCarlo(_) => Err(Error::Config(format!("{what} needs the exact engine"))),
        }
    }
}

/// Master seed, number of disorder realizations and worker threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleConfig {
    pub master_seed: u64,
    pub realizations: usize,
    pub workers: usize,
}

impl EnsembleConfig {
    pub fn new(master_seed: u64, realizations: usize, workers: usize) -> Self {
        Self {
            master_seed,
            realizations,
            workers,
        }
    }

    fn seed(&self, r: usize, role: StreamRole) -> DisorderSeed {
        DisorderSeed::new(self.master_seed, r as u64, role)
    }

    pub fn chain_seed(&self, r: usize) -> DisorderSeed {
        self.seed(r, StreamRole::McChain(0))
    }

    /// Patterns of realization `r`. Rows are a prefix of the stream, so
    /// different M at the same N share their leading patterns.
    pub fn patterns(&self, r: usize, dist: PatternDistribution, n: usize, m: usize) -> Result<Disorder> {
        Ok(Disorder::hopfield(gen_patterns(self.seed(r, StreamRole::Patterns), dist, n, m)?))
    }

    pub fn couplings(&self, r: usize, n: usize) -> Result<Disorder> {
        Ok(Disorder::sk(gen_couplings(self.seed(r, StreamRole::Couplings), n)?))
    }

    pub fn both(&self, r: usize, dist: PatternDistribution, n: usize, m: usize) -> Result<Disorder> {
        Ok(Disorder::both(
            gen_patterns(self.seed(r, StreamRole::Patterns), dist, n, m)?,
            gen_couplings(self.seed(r, StreamRole::Couplings), n)?,
        ))
    }
}

/// M = alpha N, which must be a positive integer.
pub fn patterns_for_alpha(alpha: f64, n: usize) -> Result<usize> {
    let m = alpha * n as f64;
    let rounded = m.round();
    if !(alpha > 0.0) || (m - rounded).abs() > 1e-9 * m.max(1.0) || rounded < 1.0 {
        return Err(Error::Config(format!("alpha * N = {alpha} * {n} is not a positive integer")));
    }
    Ok(rounded as usize)
}
