//! From-scratch energies. All sums use pairwise summation.

use super::{check_dimensions, CouplingMatrix, Disorder, Hamiltonian, ModelParams, PatternMatrix, SpinConfiguration};
use crate::error::{Error, Result};
use crate::stats::pairwise_sum;

fn check_config(x: &SpinConfiguration, p: &ModelParams) -> Result<()> {
    if x.len() != p.n {
        return Err(Error::Config(format!("configuration has {} sites but N = {}", x.len(), p.n)));
    }
    Ok(())
}

fn check_patterns(x: &SpinConfiguration, xi: &PatternMatrix, p: &ModelParams) -> Result<()> {
    check_config(x, p)?;
    if xi.n() != p.n || xi.m() != p.m {
        return Err(Error::Config(format!(
            "patterns are {}x{} but parameters say M = {}, N = {}",
            xi.m(),
            xi.n(),
            p.m,
            p.n
        )));
    }
    Ok(())
}

fn hopfield_sum(x: &SpinConfiguration, xi: &PatternMatrix, first: usize) -> f64 {
    let squares: Vec<f64> = (first..xi.m())
        .map(|k| {
            let m = x.dot(xi.row(k));
            m * m
        })
        .collect();
    -pairwise_sum(&squares) / ((xi.n() * xi.m()) as f64).sqrt()
}

/// `H = -(1/sqrt(NM)) sum_k (x . xi^k)^2`.
pub fn energy_hopfield(x: &SpinConfiguration, xi: &PatternMatrix, p: &ModelParams) -> Result<f64> {
    check_patterns(x, xi, p)?;
    Ok(hopfield_sum(x, xi, 0))
}

/// Hopfield energy with the first pattern removed, keeping the `1/sqrt(NM)`
/// normalisation, so that `H* = H + S^2/sqrt(alpha)`.
pub fn energy_hopfield_leave_one_out(x: &SpinConfiguration, xi: &PatternMatrix, p: &ModelParams) -> Result<f64> {
    check_patterns(x, xi, p)?;
    Ok(hopfield_sum(x, xi, 1))
}

/// `H = -(1/sqrt(N)) sum_{i,j} J_ij x_i x_j` over all ordered pairs, diagonal included.
pub fn energy_sk(x: &SpinConfiguration, j: &CouplingMatrix, p: &ModelParams) -> Result<f64> {
    check_config(x, p)?;
    if j.n() != p.n {
        return Err(Error::Config(format!("couplings are {0}x{0} but N = {1}", j.n(), p.n)));
    }
    let rows: Vec<f64> = (0..p.n).map(|i| x.value(i) * x.dot(j.row(i))).collect();
    Ok(-pairwise_sum(&rows) / (p.n as f64).sqrt())
}

/// `H_t = sqrt(1-t) sqrt(2) H_SK + sqrt(t) H_Hop + N sqrt(alpha t)`.
pub fn energy_interpolated(
    x: &SpinConfiguration,
    xi: &PatternMatrix,
    j: &CouplingMatrix,
    t: f64,
    p: &ModelParams,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("interpolation parameter t = {t} is outside [0, 1]")));
    }
    let sk = energy_sk(x, j, p)?;
    let hop = energy_hopfield(x, xi, p)?;
    Ok((1.0 - t).sqrt() * std::f64::consts::SQRT_2 * sk + t.sqrt() * hop + p.n as f64 * (p.alpha() * t).sqrt())
}

/// Overlap `S = (x . xi^1)/sqrt(N)` with the first pattern.
pub fn overlap(x: &SpinConfiguration, xi: &PatternMatrix, p: &ModelParams) -> Result<f64> {
    check_patterns(x, xi, p)?;
    Ok(x.dot(xi.row(0)) / (p.n as f64).sqrt())
}

/// Energy of `x` under the chosen Hamiltonian.
pub fn energy(x: &SpinConfiguration, disorder: &Disorder, which: Hamiltonian, p: &ModelParams) -> Result<f64> {
    check_dimensions(disorder, p, which)?;
    match which {
        Hamiltonian::Hopfield => energy_hopfield(x, disorder.patterns()?, p),
        Hamiltonian::LeaveOneOut => energy_hopfield_leave_one_out(x, disorder.patterns()?, p),
        Hamiltonian::Sk { scale } => Ok(scale * energy_sk(x, disorder.couplings()?, p)?),
        Hamiltonian::Interpolated { t } => {
            energy_interpolated(x, disorder.patterns()?, disorder.couplings()?, t, p)
        }
    }
}
