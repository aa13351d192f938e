//! Tail and exponential moment of the overlap with the first pattern.

use super::{patterns_for_alpha, Engine, EnsembleConfig};
use crate::error::{Error, Result};
use crate::mc::{average_records, disorder_map};
use crate::model::ModelParams;
use crate::stats::{weighted_line_fit, EstimateWithError};

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapTailConfig {
    pub params: ModelParams,
    /// Tail evaluated at r = 0, 1, ..., r_max.
    pub r_max: usize,
    /// Inclusive range of r used by the rate fit.
    pub fit_range: (usize, usize),
    pub engine: Engine,
    pub ensemble: EnsembleConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    pub r: Vec<f64>,
    /// Disorder average of G(S^2 > r).
    pub tail: Vec<EstimateWithError>,
    pub fit_range: (usize, usize),
    /// Rate from a weighted fit of ln E[G(S^2 > r)] against r.
    pub rate: f64,
    pub rate_se: f64,
    pub intercept: f64,
    pub beta: f64,
    pub alpha: f64,
    pub n_disorder: usize,
}

impl TailFit {
    /// Bound rate a = 1/2 - beta / sqrt(alpha), always recomputed.
    pub fn theoretical_rate(&self) -> f64 {
        0.5 - self.beta / self.alpha.sqrt()
    }

    /// Reference prefactor 2 e^{beta/sqrt(alpha)} / (1 - e^{-a}).
    pub fn theoretical_prefactor(&self) -> f64 {
        2.0 * (self.beta / self.alpha.sqrt()).exp() / (1.0 - (-self.theoretical_rate()).exp())
    }

    pub fn rate_ratio(&self) -> f64 {
        self.rate / self.theoretical_rate()
    }
}

fn require_positive_rate(p: &ModelParams) -> Result<f64> {
    let a = p.tail_rate();
    if a <= 0.0 {
        return Err(Error::Precondition(format!(
            "tail rate a = 1/2 - beta/sqrt(alpha) = {a} is not positive (beta = {}, alpha = {})",
            p.beta,
            p.alpha()
        )));
    }
    Ok(a)
}

pub fn run_overlap_tail(cfg: &OverlapTailConfig) -> Result<TailFit> {
    let p = cfg.params;
    require_positive_rate(&p)?;
    let (lo, hi) = cfg.fit_range;
    if lo >= hi || hi > cfg.r_max {
        return Err(Error::Config(format!(
            "fit range {lo}..={hi} must be increasing and within r_max = {}",
            cfg.r_max
        )));
    }
    let ens = &cfg.ensemble;
    let per_realization = disorder_map(ens.realizations, ens.workers, |r| {
        let d = ens.patterns(r, p.dist, p.n, p.m)?;
        Ok(cfg.engine.overlap_statistics(&d, &p, 0.0, cfg.r_max, ens.chain_seed(r))?.tail)
    })?;
    let tail: Vec<EstimateWithError> = (0..=cfg.r_max)
        .map(|k| average_records(&per_realization.iter().map(|t| t[k]).collect::<Vec<_>>()))
        .collect();

    let (mut xs, mut ys, mut ws) = (Vec::new(), Vec::new(), Vec::new());
    for k in lo..=hi {
        let e = tail[k];
        if e.mean > 0.0 {
            xs.push(k as f64);
            ys.push(e.mean.ln());
            // var(ln t) ~ (se / t)^2; fall back to equal weights for zero errors
            ws.push(if e.std_error > 0.0 { (e.mean / e.std_error).powi(2) } else { 1.0 });
        }
    }
    if xs.len() < 2 {
        return Err(Error::Precondition(format!(
            "fewer than two positive tail values in r = {lo}..={hi}; nothing to fit"
        )));
    }
    let fit = weighted_line_fit(&xs, &ys, &ws)?;
    Ok(TailFit {
        r: (0..=cfg.r_max).map(|k| k as f64).collect(),
        tail,
        fit_range: cfg.fit_range,
        rate: -fit.slope,
        rate_se: fit.slope_se,
        intercept: fit.intercept,
        beta: p.beta,
        alpha: p.alpha(),
        n_disorder: ens.realizations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpMomentConfig {
    pub n_grid: Vec<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub field: f64,
    pub dist: crate::patterns::PatternDistribution,
    pub c: f64,
    pub engine: Engine,
    pub ensemble: EnsembleConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpMomentRow {
    pub n: usize,
    pub m: usize,
    /// Disorder average of <exp(c S^2)>.
    pub value: EstimateWithError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpMomentReport {
    pub rows: Vec<ExpMomentRow>,
    pub c: f64,
    /// a = 1/2 - beta/sqrt(alpha).
    pub rate: f64,
    /// Set when c >= a, where the moment may diverge as N grows.
    pub divergence_warning: bool,
}

impl ExpMomentReport {
    pub fn max(&self) -> f64 {
        self.rows.iter().map(|r| r.value.mean).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.rows.iter().map(|r| r.value.mean).fold(f64::INFINITY, f64::min)
    }

    pub fn max_over_min(&self) -> f64 {
        self.max() / self.min()
    }
}

pub fn run_exp_moment(cfg: &ExpMomentConfig) -> Result<ExpMomentReport> {
    if !(cfg.c >= 0.0 && cfg.c.is_finite()) {
        return Err(Error::Domain(format!("exponential-moment coefficient must be >= 0, got {}", cfg.c)));
    }
    let rate = 0.5 - cfg.beta / cfg.alpha.sqrt();
    let divergence_warning = cfg.c >= rate;
    if divergence_warning {
        log::warn!("c = {} is not below a = {rate}; the exponential moment may diverge", cfg.c);
    }
    let ens = &cfg.ensemble;
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let m = patterns_for_alpha(cfg.alpha, n)?;
        let p = ModelParams::new(n, m, cfg.beta, cfg.field, cfg.dist)?;
        let records = disorder_map(ens.realizations, ens.workers, |r| {
            let d = ens.patterns(r, p.dist, n, m)?;
            Ok(cfg.engine.overlap_statistics(&d, &p, cfg.c, 0, ens.chain_seed(r))?.exp_moment)
        })?;
        rows.push(ExpMomentRow {
            n,
            m,
            value: average_records(&records),
        });
    }
    Ok(ExpMomentReport {
        rows,
        c: cfg.c,
        rate,
        divergence_warning,
    })
}
