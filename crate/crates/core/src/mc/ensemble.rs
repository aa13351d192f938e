//! Averages over independent disorder realizations, spread over a worker pool.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stats::{jackknife_mean, EstimateWithError, Method};

/// Worker pool of exactly `workers` threads.
pub fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::Config("worker count must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

/// Evaluate `f` on realization indices `0..n` using `workers` threads.
///
/// Each realization must be a pure function of its index; results come back in
/// index order, so the output does not depend on the worker count. Failures
/// are collected into [`Error::PartialFailure`].
pub fn disorder_map<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let results: Vec<Result<T>> = if workers == 1 {
        (0..n).map(&f).collect()
    } else {
        worker_pool(workers)?.install(|| (0..n).into_par_iter().map(&f).collect())
    };
    let mut failed = Vec::new();
    let mut first = None;
    let mut ok = Vec::with_capacity(n);
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                failed.push(i);
                first.get_or_insert(e);
            }
        }
    }
    match first {
        None => Ok(ok),
        Some(e) if failed.len() == n && n == 1 => Err(e),
        Some(e) => Err(Error::PartialFailure {
            failed,
            total: n,
            first: Box::new(e),
        }),
    }
}

/// Disorder average with its per-realization records.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderAverage {
    pub estimate: EstimateWithError,
    pub records: Vec<f64>,
}

/// Mean over realizations with the jackknife standard error.
pub fn average_records(records: &[f64]) -> EstimateWithError {
    let j = jackknife_mean(records);
    EstimateWithError::new(j.mean, j.std_error, records.len(), Method::DisorderAverage)
}

/// Average a scalar estimator over `n_realizations` realizations.
pub fn disorder_average<F>(n_realizations: usize, workers: usize, f: F) -> Result<DisorderAverage>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    if n_realizations < 2 {
        return Err(Error::Config(format!(
            "a disorder average needs at least 2 realizations, got {n_realizations}"
        )));
    }
    let records = disorder_map(n_realizations, workers, f)?;
    Ok(DisorderAverage {
        estimate: average_records(&records),
        records,
    })
}
