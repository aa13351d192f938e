//! Numerical and statistical helpers shared by the engines: stable summation,
//! log-sum-exp, error bars (jackknife, batch means), autocorrelation times,
//! quadrature and least-squares fits.

use std::fmt;

use crate::error::{Error, Result};

/// Pairwise (tree) summation. Rounding error grows as O(log n) instead of O(n).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `ln(2 cosh b)` without overflow for large |b|.
pub fn log_two_cosh(b: f64) -> f64 {
    let a = b.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// Single-pass log-sum-exp with a running maximum.
///
/// Alongside the normaliser it accumulates weighted sums of any number of
/// observables, rescaling everything whenever the maximum moves.
#[derive(Debug, Clone)]
pub struct StreamingLse {
    max: f64,
    sum: f64,
    acc: Vec<f64>,
}

impl StreamingLse {
    pub fn new(n_observables: usize) -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
            acc: vec![0.0; n_observables],
        }
    }

    /// Add one term with log-weight `w` and observable values `values`.
    #[inline]
    pub fn push(&mut self, w: f64, values: &[f64]) {
        debug_assert_eq!(values.len(), self.acc.len());
        if w > self.max {
            let scale = (self.max - w).exp();
            self.sum *= scale;
            for a in &mut self.acc {
                *a *= scale;
            }
            self.max = w;
        }
        let weight = (w - self.max).exp();
        self.sum += weight;
        for (a, v) in self.acc.iter_mut().zip(values) {
            *a += weight * v;
        }
    }

    pub fn max_exponent(&self) -> f64 {
        self.max
    }

    pub fn log_sum(&self) -> f64 {
        self.max + self.sum.ln()
    }

    /// Weighted averages of the observables.
    pub fn averages(&self) -> Vec<f64> {
        self.acc.iter().map(|a| a / self.sum).collect()
    }
}

/// How an estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exact,
    ThermoIntegration,
    DisorderAverage,
    Jackknife,
    BatchMeans,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Exact => "exact",
            Method::ThermoIntegration => "thermo_integration",
            Method::DisorderAverage => "disorder_average",
            Method::Jackknife => "jackknife",
            Method::BatchMeans => "batch_means",
        };
        f.write_str(s)
    }
}

/// Point estimate with a standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithError {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub method: Method,
    /// Set when a stochastic method produced a zero error bar.
    pub degenerate: bool,
}

impl EstimateWithError {
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            std_error: 0.0,
            n_samples: 1,
            method: Method::Exact,
            degenerate: false,
        }
    }

    pub fn new(mean: f64, std_error: f64, n_samples: usize, method: Method) -> Self {
        let degenerate = method != Method::Exact && std_error == 0.0;
        Self {
            mean,
            std_error,
            n_samples: n_samples.max(1),
            method,
            degenerate,
        }
    }

    /// Number of standard errors separating this estimate from `value`.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (self.mean - value).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }

    pub fn covers(&self, value: f64, sigmas: f64) -> bool {
        (self.mean - value).abs() <= sigmas * self.std_error
    }
}

impl fmt::Display for EstimateWithError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6} ± {:.6} (n = {}, {})", self.mean, self.std_error, self.n_samples, self.method)
    }
}

/// Standard errors of independent estimates combined in quadrature.
pub fn quadrature(errors: &[f64]) -> f64 {
    errors.iter().map(|e| e * e).sum::<f64>().sqrt()
}

pub fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    pairwise_sum(&dev) / (n - 1) as f64
}

/// Jackknife estimate and standard error of an arbitrary statistic.
///
/// The returned point estimate is the full-sample statistic; the error is the
/// leave-one-out jackknife error.
pub fn jackknife<F>(values: &[f64], stat: F) -> (f64, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = values.len();
    let full = stat(values);
    if n < 2 {
        return (full, 0.0);
    }
    let mut buf = Vec::with_capacity(n - 1);
    let loo: Vec<f64> = (0..n)
        .map(|i| {
            buf.clear();
            buf.extend_from_slice(&values[..i]);
            buf.extend_from_slice(&values[i + 1..]);
            stat(&buf)
        })
        .collect();
    let m = mean(&loo);
    let ss: f64 = loo.iter().map(|v| (v - m) * (v - m)).sum();
    (full, ((n - 1) as f64 / n as f64 * ss).sqrt())
}

/// Jackknife of the sample mean, which reduces to s/sqrt(n).
pub fn jackknife_mean(values: &[f64]) -> EstimateWithError {
    let n = values.len();
    let m = mean(values);
    let se = (sample_variance(values) / n as f64).sqrt();
    EstimateWithError::new(m, se, n, Method::Jackknife)
}

/// Batch-means estimate of the mean of a correlated series.
pub fn batch_means(series: &[f64], n_batches: usize) -> EstimateWithError {
    let batches = batch_averages(series, n_batches);
    let m = mean(series);
    let se = (sample_variance(&batches) / batches.len() as f64).sqrt();
    EstimateWithError::new(m, se, series.len(), Method::BatchMeans)
}

/// Averages over `n_batches` contiguous blocks; trailing samples that do not
/// fill a block are dropped. Falls back to one sample per batch for short series.
pub fn batch_averages(series: &[f64], n_batches: usize) -> Vec<f64> {
    let nb = n_batches.clamp(1, series.len().max(1));
    let len = series.len() / nb;
    if len == 0 {
        return series.to_vec();
    }
    series.chunks_exact(len).take(nb).map(mean).collect()
}

/// Integrated autocorrelation time with Sokal's self-consistent window: the
/// sum over lags stops at the first W with W >= 6 tau(W).
pub fn integrated_autocorrelation_time(series: &[f64]) -> f64 {
    const WINDOW_FACTOR: f64 = 6.0;
    let n = series.len();
    if n < 4 {
        return 0.5;
    }
    let m = mean(series);
    let dev: Vec<f64> = series.iter().map(|v| v - m).collect();
    let c0: f64 = dev.iter().map(|d| d * d).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return 0.5;
    }
    let mut tau = 0.5;
    for lag in 1..n / 2 {
        let c: f64 = dev[..n - lag].iter().zip(&dev[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        tau += c / c0;
        if lag as f64 >= WINDOW_FACTOR * tau {
            break;
        }
    }
    tau.max(0.5)
}

/// Composite Simpson rule on a possibly non-uniform grid with an even number
/// of intervals.
pub fn simpson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Config(format!(
            "quadrature grid has {} nodes but {} values",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 || x.len().is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "Simpson quadrature needs an odd number (>= 3) of nodes, got {}",
            x.len()
        )));
    }
    let mut total = 0.0;
    for k in (0..x.len() - 2).step_by(2) {
        let h0 = x[k + 1] - x[k];
        let h1 = x[k + 2] - x[k + 1];
        if h0 <= 0.0 || h1 <= 0.0 {
            return Err(Error::Domain("quadrature grid must be strictly increasing".into()));
        }
        let s = h0 + h1;
        total += s / 6.0
            * ((2.0 - h1 / h0) * y[k] + s * s / (h0 * h1) * y[k + 1] + (2.0 - h0 / h1) * y[k + 2]);
    }
    Ok(total)
}

/// Result of a straight-line fit `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Weighted least squares. Weights are inverse variances; with unit weights the
/// slope error is scaled by the residual variance.
pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() != w.len() {
        return Err(Error::Config("line fit inputs differ in length".into()));
    }
    if x.len() < 2 {
        return Err(Error::Domain("line fit needs at least two points".into()));
    }
    let sw: f64 = w.iter().sum();
    let sx: f64 = x.iter().zip(w).map(|(x, w)| w * x).sum();
    let sy: f64 = y.iter().zip(w).map(|(y, w)| w * y).sum();
    let xm = sx / sw;
    let ym = sy / sw;
    let sxx: f64 = x.iter().zip(w).map(|(x, w)| w * (x - xm) * (x - xm)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((x, y), w)| w * (x - xm) * (y - ym)).sum();
    if sxx <= 0.0 {
        return Err(Error::Domain("line fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let slope_se = (1.0 / sxx).sqrt();
    Ok(LineFit {
        slope,
        intercept,
        slope_se,
    })
}

/// Ordinary least squares.
pub fn line_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let w = vec![1.0; x.len()];
    let mut fit = weighted_line_fit(x, y, &w)?;
    let n = x.len();
    if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(x, y)| {
                let r = y - fit.intercept - fit.slope * x;
                r * r
            })
            .sum();
        fit.slope_se *= (rss / (n - 2) as f64).sqrt();
    } else {
        fit.slope_se = 0.0;
    }
    Ok(fit)
}
