use crate::error::{Error, Result};
use crate::patterns::PatternDistribution;

/// Quenched Hopfield patterns: `m` rows (patterns) by `n` columns (sites).
#[derive(Debug, Clone, PartialEq)]
pub struct PatternMatrix {
    n: usize,
    m: usize,
    entries: Vec<f64>,
    dist: PatternDistribution,
}

impl PatternMatrix {
    pub fn new(n: usize, m: usize, entries: Vec<f64>, dist: PatternDistribution) -> Result<Self> {
        if entries.len() != n * m {
            return Err(Error::Config(format!(
                "pattern matrix {m}x{n} needs {} entries, got {}",
                n * m,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::Disorder(format!("pattern entry {bad} is not finite")));
        }
        if matches!(dist, PatternDistribution::Bernoulli) && entries.iter().any(|&v| v != 1.0 && v != -1.0) {
            return Err(Error::Disorder("Bernoulli patterns must be ±1".into()));
        }
        Ok(Self { n, m, entries, dist })
    }

    pub fn from_rows(rows: &[Vec<f64>], dist: PatternDistribution) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Config("pattern rows differ in length".into()));
        }
        Self::new(n, rows.len(), rows.concat(), dist)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dist(&self) -> PatternDistribution {
        self.dist
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Pattern `k` (0-based; row 0 is the first pattern).
    pub fn row(&self, k: usize) -> &[f64] {
        &self.entries[k * self.n..(k + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.entries[k * self.n + i]
    }

    /// Copy with entry (k, i) replaced. Used for finite-difference probes.
    pub fn with_entry(&self, k: usize, i: usize, value: f64) -> Self {
        let mut c = self.clone();
        c.entries[k * self.n + i] = value;
        // A perturbed entry is no longer ±1.
        if c.dist == PatternDistribution::Bernoulli && value.abs() != 1.0 {
            c.dist = PatternDistribution::Gaussian;
        }
        c
    }

    /// Copy with row `k` negated.
    pub fn with_row_negated(&self, k: usize) -> Self {
        let mut c = self.clone();
        for v in &mut c.entries[k * self.n..(k + 1) * self.n] {
            *v = -*v;
        }
        c
    }

    pub(crate) fn entries_mut_unchecked(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    pub(crate) fn set_dist(&mut self, dist: PatternDistribution) {
        self.dist = dist;
    }
}

/// SK couplings: a full `n`×`n` matrix of independent entries, neither
/// symmetrised nor with an empty diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CouplingMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Config(format!(
                "coupling matrix {n}x{n} needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::Disorder(format!("coupling entry {bad} is not finite")));
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }
}

/// One realization of quenched disorder. Which parts are needed depends on
/// the Hamiltonian.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Disorder {
    pub patterns: Option<PatternMatrix>,
    pub couplings: Option<CouplingMatrix>,
}

impl Disorder {
    pub fn hopfield(patterns: PatternMatrix) -> Self {
        Self {
            patterns: Some(patterns),
            couplings: None,
        }
    }

    pub fn sk(couplings: CouplingMatrix) -> Self {
        Self {
            patterns: None,
            couplings: Some(couplings),
        }
    }

    pub fn both(patterns: PatternMatrix, couplings: CouplingMatrix) -> Self {
        Self {
            patterns: Some(patterns),
            couplings: Some(couplings),
        }
    }

    pub fn patterns(&self) -> Result<&PatternMatrix> {
        self.patterns
            .as_ref()
            .ok_or_else(|| Error::Config("this Hamiltonian needs a pattern matrix".into()))
    }

    pub fn couplings(&self) -> Result<&CouplingMatrix> {
        self.couplings
            .as_ref()
            .ok_or_else(|| Error::Config("this Hamiltonian needs a coupling matrix".into()))
    }

    /// First pattern, which defines the overlap S.
    pub fn first_pattern(&self) -> Option<&[f64]> {
        self.patterns.as_ref().filter(|p| p.m() >= 1).map(|p| p.row(0))
    }
}
