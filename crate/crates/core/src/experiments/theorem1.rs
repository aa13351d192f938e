//! Hopfield free energy against beta sqrt(alpha) plus the SK free energy at
//! inverse temperature sqrt(2) beta.

use super::{patterns_for_alpha, Engine, EnsembleConfig};
use crate::error::Result;
use crate::mc::disorder_average;
use crate::model::{Hamiltonian, ModelParams};
use crate::patterns::PatternDistribution;
use crate::stats::{quadrature, EstimateWithError, Method};

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Config {
    pub alphas: Vec<f64>,
    pub beta: f64,
    pub field: f64,
    pub n: usize,
    pub dist: PatternDistribution,
    pub engine: Engine,
    pub ensemble: EnsembleConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub alpha: f64,
    pub m: usize,
    pub f_hop: EstimateWithError,
    pub f_sk: EstimateWithError,
    /// E[F_Hop] - beta sqrt(alpha) - E[F_SK(sqrt 2 beta)], errors in quadrature.
    pub residual: EstimateWithError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualTable {
    pub beta: f64,
    pub field: f64,
    pub n: usize,
    pub n_disorder: usize,
    pub rows: Vec<ResidualRow>,
    /// Least-squares constant of |residual| = C beta^3 / sqrt(alpha); `None` at beta = 0.
    pub c_hat: Option<f64>,
}

fn residual(alpha: f64, beta: f64, f_hop: EstimateWithError, f_sk: EstimateWithError) -> EstimateWithError {
    EstimateWithError::new(
        f_hop.mean - beta * alpha.sqrt() - f_sk.mean,
        quadrature(&[f_hop.std_error, f_sk.std_error]),
        f_hop.n_samples.min(f_sk.n_samples),
        Method::DisorderAverage,
    )
}

/// Disorder average of F_SK(sqrt 2 beta, B); realization r uses coupling stream r.
fn sk_baseline(n: usize, beta: f64, field: f64, engine: &Engine, ens: &EnsembleConfig) -> Result<EstimateWithError> {
    let p = ModelParams::new(n, 1, beta, field, PatternDistribution::Gaussian)?;
    Ok(disorder_average(ens.realizations, ens.workers, |r| {
        engine.free_energy(&ens.couplings(r, n)?, &p, Hamiltonian::SK_SQRT2, ens.chain_seed(r))
    })?
    .estimate)
}

fn hopfield_average(p: &ModelParams, engine: &Engine, ens: &EnsembleConfig) -> Result<EstimateWithError> {
    Ok(disorder_average(ens.realizations, ens.workers, |r| {
        engine.free_energy(&ens.patterns(r, p.dist, p.n, p.m)?, p, Hamiltonian::Hopfield, ens.chain_seed(r))
    })?
    .estimate)
}

fn warn_outside_regime(alpha: f64, beta: f64) {
    if alpha < 4.0 * beta * beta {
        log::warn!("alpha = {alpha} is below 4 beta^2 = {}; the comparison is outside its regime", 4.0 * beta * beta);
    }
}

/// Residual table over `cfg.alphas`. The SK baseline is computed once and
/// shared by every row.
pub fn run_theorem1(cfg: &Theorem1Config) -> Result<ResidualTable> {
    let ms = cfg
        .alphas
        .iter()
        .map(|&a| patterns_for_alpha(a, cfg.n))
        .collect::<Result<Vec<_>>>()?;
    for &a in &cfg.alphas {
        warn_outside_regime(a, cfg.beta);
    }
    let f_sk = sk_baseline(cfg.n, cfg.beta, cfg.field, &cfg.engine, &cfg.ensemble)?;
    let mut rows = Vec::with_capacity(ms.len());
    for (&alpha, &m) in cfg.alphas.iter().zip(&ms) {
        let p = ModelParams::new(cfg.n, m, cfg.beta, cfg.field, cfg.dist)?;
        let f_hop = hopfield_average(&p, &cfg.engine, &cfg.ensemble)?;
        log::info!("alpha = {alpha}: F_hop = {f_hop}");
        rows.push(ResidualRow {
            alpha,
            m,
            f_hop,
            f_sk,
            residual: residual(alpha, cfg.beta, f_hop, f_sk),
        });
    }
    let c_hat = fit_constant(&rows, cfg.beta);
    Ok(ResidualTable {
        beta: cfg.beta,
        field: cfg.field,
        n: cfg.n,
        n_disorder: cfg.ensemble.realizations,
        rows,
        c_hat,
    })
}

/// Slope through the origin of |residual| against beta^3 / sqrt(alpha).
fn fit_constant(rows: &[ResidualRow], beta: f64) -> Option<f64> {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for r in rows {
        let x = beta.powi(3) / r.alpha.sqrt();
        sxy += x * r.residual.mean.abs();
        sxx += x * x;
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Config {
    pub n: usize,
    pub alphas: Vec<f64>,
    /// (beta, B) for each panel.
    pub panels: Vec<(f64, f64)>,
    pub dist: PatternDistribution,
    pub n_sk: usize,
    pub n_hop_per_alpha: usize,
    pub engine: Engine,
    pub master_seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Figure1Point {
    pub alpha: f64,
    pub m: usize,
    pub f_hop: EstimateWithError,
    /// beta sqrt(alpha) + P_hat.
    pub curve: f64,
    pub residual: EstimateWithError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Panel {
    pub beta: f64,
    pub field: f64,
    /// Finite-N SK disorder average standing in for the Parisi value.
    pub p_hat: EstimateWithError,
    pub points: Vec<Figure1Point>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Data {
    pub n: usize,
    pub panels: Vec<Figure1Panel>,
}

/// Hopfield free-energy points against the curve beta sqrt(alpha) + P_hat for
/// each (beta, B) panel.
pub fn run_figure1(cfg: &Figure1Config) -> Result<Figure1Data> {
    let ms = cfg
        .alphas
        .iter()
        .map(|&a| patterns_for_alpha(a, cfg.n))
        .collect::<Result<Vec<_>>>()?;
    let sk_ens = EnsembleConfig::new(cfg.master_seed, cfg.n_sk, cfg.workers);
    let hop_ens = EnsembleConfig::new(cfg.master_seed, cfg.n_hop_per_alpha, cfg.workers);
    let mut panels = Vec::with_capacity(cfg.panels.len());
    for &(beta, field) in &cfg.panels {
        let p_hat = sk_baseline(cfg.n, beta, field, &cfg.engine, &sk_ens)?;
        let mut points = Vec::with_capacity(ms.len());
        for (&alpha, &m) in cfg.alphas.iter().zip(&ms) {
            let p = ModelParams::new(cfg.n, m, beta, field, cfg.dist)?;
            let f_hop = hopfield_average(&p, &cfg.engine, &hop_ens)?;
            log::info!("beta = {beta}, B = {field}, alpha = {alpha}: F_hop = {f_hop}");
            points.push(Figure1Point {
                alpha,
                m,
                f_hop,
                curve: beta * alpha.sqrt() + p_hat.mean,
                residual: residual(alpha, beta, f_hop, p_hat),
            });
        }
        panels.push(Figure1Panel {
            beta,
            field,
            p_hat,
            points,
        });
    }
    Ok(Figure1Data { n: cfg.n, panels })
}
