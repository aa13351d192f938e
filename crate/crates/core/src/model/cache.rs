//! Incremental single-spin-flip bookkeeping in terms of pattern overlaps
//! `m_k = x . xi^k` (O(M) per flip) and SK local fields
//! `h_i = sum_j (J_ij + J_ji) x_j` (O(N) per flip).

use super::{check_dimensions, Disorder, Hamiltonian, ModelParams, SpinConfiguration};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapCache {
    m: Vec<f64>,
    sk_field: Option<Vec<f64>>,
}

/// Change in energy and in the `B sum_i x_i` term caused by one flip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipDelta {
    pub energy: f64,
    pub field_term: f64,
}

impl FlipDelta {
    /// Change of the Gibbs log-weight `-beta H + B sum x`; `field_term` already
    /// includes B.
    #[inline]
    pub fn log_weight(&self, beta: f64) -> f64 {
        -beta * self.energy + self.field_term
    }
}

fn fresh_overlaps(x: &SpinConfiguration, disorder: &Disorder) -> Vec<f64> {
    match &disorder.patterns {
        Some(xi) => (0..xi.m()).map(|k| x.dot(xi.row(k))).collect(),
        None => Vec::new(),
    }
}

fn fresh_sk_field(x: &SpinConfiguration, disorder: &Disorder) -> Option<Vec<f64>> {
    disorder.couplings.as_ref().map(|j| {
        let n = j.n();
        (0..n)
            .map(|i| (0..n).map(|k| (j.get(i, k) + j.get(k, i)) * x.value(k)).sum())
            .collect()
    })
}

impl OverlapCache {
    /// Build the cache for `x`. Pattern overlaps are kept whenever patterns are
    /// present; SK fields only when `which` has an SK term.
    pub fn new(x: &SpinConfiguration, disorder: &Disorder, which: Hamiltonian, p: &ModelParams) -> Result<Self> {
        check_dimensions(disorder, p, which)?;
        let sk_field = if which.needs_couplings() {
            fresh_sk_field(x, disorder)
        } else {
            None
        };
        Ok(Self {
            m: fresh_overlaps(x, disorder),
            sk_field,
        })
    }

    /// Cached `m_k = x . xi^k`.
    pub fn pattern_overlaps(&self) -> &[f64] {
        &self.m
    }

    pub fn sk_field(&self) -> Option<&[f64]> {
        self.sk_field.as_deref()
    }

    /// Raw overlap with the first pattern, `x . xi^1`.
    pub fn first_overlap(&self) -> Option<f64> {
        self.m.first().copied()
    }

    /// Mutable access for fault-injection tests.
    #[doc(hidden)]
    pub fn pattern_overlaps_mut(&mut self) -> &mut [f64] {
        &mut self.m
    }
}

fn hopfield_delta(x: &SpinConfiguration, cache: &OverlapCache, i: usize, disorder: &Disorder, first: usize) -> f64 {
    let xi = disorder.patterns.as_ref().expect("checked at cache construction");
    let xi_sign = x.value(i);
    let mut change = 0.0;
    for k in first..xi.m() {
        let v = xi.get(k, i);
        change += v * v - xi_sign * v * cache.m[k];
    }
    -4.0 * change / ((xi.n() * xi.m()) as f64).sqrt()
}

fn sk_delta(x: &SpinConfiguration, cache: &OverlapCache, i: usize, disorder: &Disorder) -> f64 {
    let j = disorder.couplings.as_ref().expect("checked at cache construction");
    let h = cache.sk_field.as_ref().expect("SK field requested without an SK term")[i];
    let xi_sign = x.value(i);
    2.0 * xi_sign * (h - 2.0 * j.get(i, i) * xi_sign) / (j.n() as f64).sqrt()
}

/// Energy change `H(x with spin i flipped) - H(x)` and the accompanying change
/// of `B sum x`, without modifying anything.
pub fn flip_delta(
    x: &SpinConfiguration,
    cache: &OverlapCache,
    i: usize,
    which: Hamiltonian,
    disorder: &Disorder,
    p: &ModelParams,
) -> FlipDelta {
    let energy = match which {
        Hamiltonian::Hopfield => hopfield_delta(x, cache, i, disorder, 0),
        Hamiltonian::LeaveOneOut => hopfield_delta(x, cache, i, disorder, 1),
        Hamiltonian::Sk { scale } => scale * sk_delta(x, cache, i, disorder),
        Hamiltonian::Interpolated { t } => {
            (1.0 - t).sqrt() * std::f64::consts::SQRT_2 * sk_delta(x, cache, i, disorder)
                + t.sqrt() * hopfield_delta(x, cache, i, disorder, 0)
        }
    };
    let field_term = if p.field == 0.0 { 0.0 } else { -2.0 * p.field * x.value(i) };
    FlipDelta { energy, field_term }
}

/// Flip spin `i` and update the cache in place.
pub fn apply_flip(x: &mut SpinConfiguration, cache: &mut OverlapCache, i: usize, disorder: &Disorder) {
    let old = x.value(i);
    if let Some(xi) = &disorder.patterns {
        for (k, m) in cache.m.iter_mut().enumerate() {
            *m -= 2.0 * old * xi.get(k, i);
        }
    }
    if let (Some(h), Some(j)) = (cache.sk_field.as_mut(), &disorder.couplings) {
        for (k, hk) in h.iter_mut().enumerate() {
            *hk -= 2.0 * old * (j.get(k, i) + j.get(i, k));
        }
    }
    x.flip(i);
}

/// Recompute every cached sum from scratch and return the largest absolute
/// discrepancy.
pub fn audit_cache(x: &SpinConfiguration, cache: &OverlapCache, disorder: &Disorder) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, b) in cache.m.iter().zip(fresh_overlaps(x, disorder)) {
        worst = worst.max((a - b).abs());
    }
    if let (Some(h), Some(fresh)) = (&cache.sk_field, fresh_sk_field(x, disorder)) {
        for (a, b) in h.iter().zip(fresh) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}
