//! Brute-force reference implementations used as oracles by the integration
//! tests. Deliberately naive: energies are recomputed from the defining sums
//! for every configuration and the partition function is a plain sum.

#![allow(dead_code)]

use spinglass::model::{CouplingMatrix, Disorder, Hamiltonian, ModelParams, PatternMatrix};
use spinglass::patterns::{gen_couplings, gen_patterns, DisorderSeed, PatternDistribution, StreamRole};

pub fn spins(bits: u64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 }).collect()
}

pub fn naive_hopfield(x: &[f64], xi: &PatternMatrix, skip_first: bool) -> f64 {
    let (n, m) = (xi.n(), xi.m());
    let mut h = 0.0;
    for k in usize::from(skip_first)..m {
        let mut dot = 0.0;
        for i in 0..n {
            dot += x[i] * xi.get(k, i);
        }
        h -= dot * dot;
    }
    h / ((n * m) as f64).sqrt()
}

pub fn naive_sk(x: &[f64], j: &CouplingMatrix) -> f64 {
    let n = j.n();
    let mut h = 0.0;
    for a in 0..n {
        for b in 0..n {
            h -= j.get(a, b) * x[a] * x[b];
        }
    }
    h / (n as f64).sqrt()
}

pub fn naive_energy(x: &[f64], d: &Disorder, which: Hamiltonian, p: &ModelParams) -> f64 {
    match which {
        Hamiltonian::Hopfield => naive_hopfield(x, d.patterns.as_ref().unwrap(), false),
        Hamiltonian::LeaveOneOut => naive_hopfield(x, d.patterns.as_ref().unwrap(), true),
        Hamiltonian::Sk { scale } => scale * naive_sk(x, d.couplings.as_ref().unwrap()),
        Hamiltonian::Interpolated { t } => {
            (1.0 - t).sqrt() * 2f64.sqrt() * naive_sk(x, d.couplings.as_ref().unwrap())
                + t.sqrt() * naive_hopfield(x, d.patterns.as_ref().unwrap(), false)
                + p.n as f64 * (p.alpha() * t).sqrt()
        }
    }
}

pub fn overlap(x: &[f64], d: &Disorder) -> f64 {
    let xi = d.patterns.as_ref().unwrap();
    let dot: f64 = (0..xi.n()).map(|i| x[i] * xi.get(0, i)).sum();
    dot / (xi.n() as f64).sqrt()
}

/// Unnormalised Gibbs weights of all 2^N configurations, in bit order.
pub fn gibbs_weights(d: &Disorder, p: &ModelParams, which: Hamiltonian) -> Vec<f64> {
    (0..1u64 << p.n)
        .map(|bits| {
            let x = spins(bits, p.n);
            let m: f64 = x.iter().sum();
            (-p.beta * naive_energy(&x, d, which, p) + p.field * m).exp()
        })
        .collect()
}

/// Free energy log(Z)/N by plain summation.
pub fn naive_free_energy(d: &Disorder, p: &ModelParams, which: Hamiltonian) -> f64 {
    let z: f64 = gibbs_weights(d, p, which).iter().sum();
    z.ln() / p.n as f64
}

/// Gibbs average of `f(x, S)`.
pub fn naive_expectation<F: Fn(&[f64], f64) -> f64>(d: &Disorder, p: &ModelParams, which: Hamiltonian, f: F) -> f64 {
    let w = gibbs_weights(d, p, which);
    let z: f64 = w.iter().sum();
    let has_patterns = d.patterns.is_some();
    w.iter()
        .enumerate()
        .map(|(bits, w)| {
            let x = spins(bits as u64, p.n);
            let s = if has_patterns { overlap(&x, d) } else { 0.0 };
            w * f(&x, s)
        })
        .sum::<f64>()
        / z
}

/// Probability that |x . v| exceeds `threshold` for uniform random spins and
/// a ±1 vector v: the walk position sum is 2k - N with k ~ Binomial(N, 1/2).
pub fn binomial_walk_tail(n: usize, threshold: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..=n {
        let pos = (2 * k) as f64 - n as f64;
        if pos.abs() > threshold {
            total += binomial(n, k);
        }
    }
    total / 2f64.powi(n as i32)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// E[exp(c S^2)] for S the normalised walk of N uniform ±1 spins.
pub fn binomial_walk_exp_moment(n: usize, c: f64) -> f64 {
    (0..=n)
        .map(|k| {
            let pos = (2 * k) as f64 - n as f64;
            binomial(n, k) * (c * pos * pos / n as f64).exp()
        })
        .sum::<f64>()
        / 2f64.powi(n as i32)
}

pub fn instance(seed: u64, stream: u64, dist: PatternDistribution, n: usize, m: usize) -> Disorder {
    let xi = gen_patterns(DisorderSeed::new(seed, stream, StreamRole::Patterns), dist, n, m).unwrap();
    let j = gen_couplings(DisorderSeed::new(seed, stream, StreamRole::Couplings), n).unwrap();
    Disorder::both(xi, j)
}

pub fn params(n: usize, m: usize, beta: f64, field: f64, dist: PatternDistribution) -> ModelParams {
    ModelParams::new(n, m, beta, field, dist).unwrap()
}

/// Standard-normal approximation of a chi-square statistic with `dof`
/// degrees of freedom (Wilson-Hilferty).
pub fn chi_square_z(stat: f64, dof: usize) -> f64 {
    let k = dof as f64;
    let v = 2.0 / (9.0 * k);
    ((stat / k).cbrt() - (1.0 - v)) / v.sqrt()
}
