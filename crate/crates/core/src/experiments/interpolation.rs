//! The interpolation path between sqrt(2) SK and Hopfield, and the Gaussian
//! integration-by-parts terms that control its derivative.

use super::{Engine, EnsembleConfig};
use crate::error::{Error, Result};
use crate::exact::{exact_expectations, exact_log_partition};
use crate::mc::{average_records, disorder_map};
use crate::model::{Hamiltonian, ModelParams};
use crate::observable::Observable;
use crate::patterns::PatternDistribution;
use crate::stats::{quadrature, EstimateWithError};

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationConfig {
    pub params: ModelParams,
    pub t_grid: Vec<f64>,
    pub engine: Engine,
    pub ensemble: EnsembleConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationRow {
    pub t: f64,
    pub f_t: EstimateWithError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationScan {
    pub rows: Vec<InterpolationRow>,
    /// Largest per-realization |F_{t=0} - F_SK(sqrt 2 beta)|.
    pub endpoint_gap_sk: f64,
    /// Largest per-realization |F_{t=1} - (F_Hop - beta sqrt(alpha))|.
    pub endpoint_gap_hop: f64,
    /// E[F_1 - F_0] from paired per-realization differences.
    pub total_change: EstimateWithError,
    /// Largest |E[F_{t_k+1}] - E[F_{t_k}]| / (t_{k+1} - t_k) over the grid.
    pub max_abs_slope: f64,
}

pub fn run_interpolation_scan(cfg: &InterpolationConfig) -> Result<InterpolationScan> {
    let opts = cfg.engine.require_exact("the interpolation scan")?;
    let p = cfg.params;
    let mut grid = cfg.t_grid.clone();
    if grid.iter().any(|t| !(0.0..=1.0).contains(t)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("t grid must be strictly increasing within [0, 1]".into()));
    }
    // endpoints are always evaluated for the identities
    if grid.first() != Some(&0.0) {
        grid.insert(0, 0.0);
    }
    if grid.last() != Some(&1.0) {
        grid.push(1.0);
    }
    let ens = &cfg.ensemble;
    struct Record {
        f: Vec<f64>,
        gap_sk: f64,
        gap_hop: f64,
    }
    let records = disorder_map(ens.realizations, ens.workers, |r| {
        let d = ens.both(r, p.dist, p.n, p.m)?;
        let f = grid
            .iter()
            .map(|&t| Ok(exact_log_partition(&d, &p, Hamiltonian::Interpolated { t }, opts)?.free_energy))
            .collect::<Result<Vec<f64>>>()?;
        let f_sk = exact_log_partition(&d, &p, Hamiltonian::SK_SQRT2, opts)?.free_energy;
        let f_hop = exact_log_partition(&d, &p, Hamiltonian::Hopfield, opts)?.free_energy;
        Ok(Record {
            gap_sk: (f[0] - f_sk).abs(),
            gap_hop: (f[f.len() - 1] - (f_hop - p.beta * p.alpha().sqrt())).abs(),
            f,
        })
    })?;
    let rows: Vec<InterpolationRow> = grid
        .iter()
        .enumerate()
        .map(|(k, &t)| InterpolationRow {
            t,
            f_t: average_records(&records.iter().map(|r| r.f[k]).collect::<Vec<_>>()),
        })
        .collect();
    let last = grid.len() - 1;
    let total_change = average_records(&records.iter().map(|r| r.f[last] - r.f[0]).collect::<Vec<_>>());
    let max_abs_slope = rows
        .windows(2)
        .map(|w| ((w[1].f_t.mean - w[0].f_t.mean) / (w[1].t - w[0].t)).abs())
        .fold(0.0, f64::max);
    Ok(InterpolationScan {
        rows,
        endpoint_gap_sk: records.iter().map(|r| r.gap_sk).fold(0.0, f64::max),
        endpoint_gap_hop: records.iter().map(|r| r.gap_hop).fold(0.0, f64::max),
        total_change,
        max_abs_slope,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteinConfig {
    pub params: ModelParams,
    pub t: f64,
    /// Distribution of the SK couplings; the identity needs Gaussian ones.
    pub coupling_dist: PatternDistribution,
    pub engine: Engine,
    pub ensemble: EnsembleConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteinCheck {
    pub t: f64,
    /// E[J_12 <x_1 x_2>].
    pub lhs: EstimateWithError,
    /// beta sqrt(2(1-t)) / sqrt(N) E[<X^2> - <X>^2], X = x_1 x_2.
    pub rhs: EstimateWithError,
    /// lhs - rhs from paired per-realization differences.
    pub difference: EstimateWithError,
}

impl SteinCheck {
    /// Standard errors of the two sides combined in quadrature.
    pub fn combined_std_error(&self) -> f64 {
        quadrature(&[self.lhs.std_error, self.rhs.std_error])
    }
}

pub fn run_stein_check(cfg: &SteinConfig) -> Result<SteinCheck> {
    let opts = cfg.engine.require_exact("the Stein check")?;
    if cfg.coupling_dist != PatternDistribution::Gaussian {
        return Err(Error::Precondition(format!(
            "Stein's identity needs Gaussian couplings, not {}",
            cfg.coupling_dist
        )));
    }
    if !(0.0..1.0).contains(&cfg.t) {
        return Err(Error::Domain(format!("t = {} must lie in [0, 1)", cfg.t)));
    }
    let p = cfg.params;
    if p.n < 2 {
        return Err(Error::Domain("the Stein check needs N >= 2".into()));
    }
    let coef = p.beta * (2.0 * (1.0 - cfg.t)).sqrt() / (p.n as f64).sqrt();
    let ens = &cfg.ensemble;
    let which = Hamiltonian::Interpolated { t: cfg.t };
    let pairs = disorder_map(ens.realizations, ens.workers, |r| {
        let d = ens.both(r, p.dist, p.n, p.m)?;
        let x = exact_expectations(&d, &p, which, &[Observable::spin_pair(0, 1)], opts)?.values[0];
        let j12 = d.couplings()?.get(0, 1);
        Ok((j12 * x, coef * (1.0 - x * x)))
    })?;
    let lhs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let rhs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let diff: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
    Ok(SteinCheck {
        t: cfg.t,
        lhs: average_records(&lhs),
        rhs: average_records(&rhs),
        difference: average_records(&diff),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopfieldSteinConfig {
    pub n: usize,
    pub beta: f64,
    pub field: f64,
    pub m_grid: Vec<usize>,
    pub dist: PatternDistribution,
    pub engine: Engine,
    pub ensemble: EnsembleConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfieldSteinRow {
    pub m: usize,
    /// E[xi^1_1 xi^1_2 <x_1 x_2>].
    pub lhs: EstimateWithError,
    /// (2 beta / sqrt(N M)) E[<X^2> - <X>^2].
    pub first_term: EstimateWithError,
    /// lhs - first_term, paired.
    pub remainder: EstimateWithError,
    /// remainder M / beta^2, expected to stay bounded.
    pub scaled_remainder: EstimateWithError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopfieldSteinReport {
    pub n: usize,
    pub beta: f64,
    pub rows: Vec<HopfieldSteinRow>,
}

pub fn run_hopfield_stein_check(cfg: &HopfieldSteinConfig) -> Result<HopfieldSteinReport> {
    let opts = cfg.engine.require_exact("the Hopfield Stein check")?;
    if cfg.dist != PatternDistribution::Gaussian {
        return Err(Error::Precondition(format!("integration by parts needs Gaussian patterns, not {}", cfg.dist)));
    }
    if cfg.n < 2 {
        return Err(Error::Domain("the Hopfield Stein check needs N >= 2".into()));
    }
    let ens = &cfg.ensemble;
    let mut rows = Vec::with_capacity(cfg.m_grid.len());
    for &m in &cfg.m_grid {
        let p = ModelParams::new(cfg.n, m, cfg.beta, cfg.field, cfg.dist)?;
        let coef = 2.0 * cfg.beta / ((cfg.n * m) as f64).sqrt();
        let triples = disorder_map(ens.realizations, ens.workers, |r| {
            let d = ens.patterns(r, p.dist, p.n, m)?;
            let x = exact_expectations(&d, &p, Hamiltonian::Hopfield, &[Observable::spin_pair(0, 1)], opts)?.values[0];
            let xi = d.patterns()?;
            let lhs = xi.get(0, 0) * xi.get(0, 1) * x;
            let first = coef * (1.0 - x * x);
            Ok((lhs, first))
        })?;
        let lhs: Vec<f64> = triples.iter().map(|v| v.0).collect();
        let first: Vec<f64> = triples.iter().map(|v| v.1).collect();
        let rem: Vec<f64> = triples.iter().map(|v| v.0 - v.1).collect();
        let remainder = average_records(&rem);
        let scale = if cfg.beta > 0.0 { m as f64 / (cfg.beta * cfg.beta) } else { 0.0 };
        rows.push(HopfieldSteinRow {
            m,
            lhs: average_records(&lhs),
            first_term: average_records(&first),
            remainder,
            scaled_remainder: EstimateWithError {
                mean: remainder.mean * scale,
                std_error: remainder.std_error * scale,
                ..remainder
            },
        });
    }
    Ok(HopfieldSteinReport {
        n: cfg.n,
        beta: cfg.beta,
        rows,
    })
}
