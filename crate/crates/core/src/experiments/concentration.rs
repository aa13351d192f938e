//! Scaling of the centred moments of the free energy with N.

use super::{patterns_for_alpha, Engine, EnsembleConfig};
use crate::error::{Error, Result};
use crate::mc::disorder_map;
use crate::model::{Hamiltonian, ModelParams};
use crate::patterns::PatternDistribution;
use crate::stats::{jackknife, line_fit, mean, EstimateWithError, LineFit, Method};

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationConfig {
    pub n_grid: Vec<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub field: f64,
    pub dist: PatternDistribution,
    /// Moment order, 2 <= d < 11/2.
    pub d: f64,
    pub engine: Engine,
    pub ensemble: EnsembleConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationRow {
    pub n: usize,
    pub m: usize,
    pub mean_f: f64,
    /// E|F - E F|^d with a jackknife error.
    pub moment: EstimateWithError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationFit {
    pub rows: Vec<ConcentrationRow>,
    pub d: f64,
    /// Fit of ln(moment) against ln(N); `None` when some moment vanishes.
    pub fit: Option<LineFit>,
}

impl ConcentrationFit {
    /// Slope predicted by the concentration bound, -d/2.
    pub fn predicted_slope(&self) -> f64 {
        -self.d / 2.0
    }
}

fn centred_moment(values: &[f64], d: f64) -> f64 {
    let m = mean(values);
    mean(&values.iter().map(|v| (v - m).abs().powf(d)).collect::<Vec<_>>())
}

pub fn run_concentration(cfg: &ConcentrationConfig) -> Result<ConcentrationFit> {
    if !(2.0..5.5).contains(&cfg.d) {
        return Err(Error::Domain(format!("moment order d = {} must satisfy 2 <= d < 11/2", cfg.d)));
    }
    if cfg.alpha < 4.0 * cfg.beta * cfg.beta {
        log::warn!("alpha = {} is below 4 beta^2; concentration is not expected to hold", cfg.alpha);
    }
    let ens = &cfg.ensemble;
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let m = patterns_for_alpha(cfg.alpha, n)?;
        let p = ModelParams::new(n, m, cfg.beta, cfg.field, cfg.dist)?;
        let f = disorder_map(ens.realizations, ens.workers, |r| {
            let d = ens.patterns(r, p.dist, n, m)?;
            cfg.engine.free_energy(&d, &p, Hamiltonian::Hopfield, ens.chain_seed(r))
        })?;
        let (moment, se) = jackknife(&f, |v| centred_moment(v, cfg.d));
        rows.push(ConcentrationRow {
            n,
            m,
            mean_f: mean(&f),
            moment: EstimateWithError::new(moment, se, f.len(), Method::Jackknife),
        });
    }
    let fit = if rows.len() >= 2 && rows.iter().all(|r| r.moment.mean > 0.0) {
        let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.moment.mean.ln()).collect();
        Some(line_fit(&x, &y)?)
    } else {
        None
    };
    Ok(ConcentrationFit { rows, d: cfg.d, fit })
}
