//! Every Hamiltonian here is a quadratic form in the spins,
//! `H(x) = offset - sum_{i<j} A_ij x_i x_j`, with `A` symmetric and zero on the
//! diagonal (diagonal terms are configuration independent because x_i^2 = 1).
//! Building `A` once turns every single-spin flip into O(N) work regardless of
//! the number of patterns.

use super::{check_dimensions, spin_at, CouplingMatrix, Disorder, Hamiltonian, ModelParams, PatternMatrix, SpinConfiguration};
use crate::error::Result;
use crate::stats::pairwise_sum;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseForm {
    n: usize,
    coupling: Vec<f64>,
    offset: f64,
}

impl DenseForm {
    /// Hopfield form over patterns `first..M`, normalised by `1/sqrt(NM)`.
    pub fn hopfield(xi: &PatternMatrix, first: usize) -> Self {
        let (n, m) = (xi.n(), xi.m());
        let norm = ((n * m) as f64).sqrt();
        let kept = m.saturating_sub(first);
        // column-major copy so that site columns are contiguous
        let mut cols = vec![0.0; n * kept];
        for k in first..m {
            for i in 0..n {
                cols[i * kept + (k - first)] = xi.get(k, i);
            }
        }
        let col = |i: usize| &cols[i * kept..(i + 1) * kept];
        let mut coupling = vec![0.0; n * n];
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            let ci = col(i);
            diag.push(pairwise_sum(&ci.iter().map(|v| v * v).collect::<Vec<_>>()));
            for j in i + 1..n {
                let dot: f64 = ci.iter().zip(col(j)).map(|(a, b)| a * b).sum();
                let a = 2.0 * dot / norm;
                coupling[i * n + j] = a;
                coupling[j * n + i] = a;
            }
        }
        Self {
            n,
            coupling,
            offset: -pairwise_sum(&diag) / norm,
        }
    }

    /// SK form `-(1/sqrt(N)) sum_{i,j} J_ij x_i x_j`.
    pub fn sk(j: &CouplingMatrix) -> Self {
        let n = j.n();
        let norm = (n as f64).sqrt();
        let mut coupling = vec![0.0; n * n];
        for a in 0..n {
            for b in a + 1..n {
                let v = (j.get(a, b) + j.get(b, a)) / norm;
                coupling[a * n + b] = v;
                coupling[b * n + a] = v;
            }
        }
        let diag: Vec<f64> = (0..n).map(|a| j.get(a, a)).collect();
        Self {
            n,
            coupling,
            offset: -pairwise_sum(&diag) / norm,
        }
    }

    /// `sum_c w_c H_c + shift`.
    pub fn combine(parts: &[(f64, &DenseForm)], shift: f64) -> Self {
        let n = parts.first().map_or(0, |(_, f)| f.n);
        assert!(parts.iter().all(|(_, f)| f.n == n), "combining forms of different sizes");
        let mut coupling = vec![0.0; n * n];
        let mut offset = 0.0;
        for (w, f) in parts {
            for (c, a) in coupling.iter_mut().zip(&f.coupling) {
                *c += w * a;
            }
            offset += w * f.offset;
        }
        Self {
            n,
            coupling,
            offset: offset + shift,
        }
    }

    /// The form for `which` on this disorder.
    pub fn for_hamiltonian(disorder: &Disorder, which: Hamiltonian, p: &ModelParams) -> Result<Self> {
        check_dimensions(disorder, p, which)?;
        Ok(match which {
            Hamiltonian::Hopfield => Self::hopfield(disorder.patterns()?, 0),
            Hamiltonian::LeaveOneOut => Self::hopfield(disorder.patterns()?, 1),
            Hamiltonian::Sk { scale } => Self::combine(&[(scale, &Self::sk(disorder.couplings()?))], 0.0),
            Hamiltonian::Interpolated { t } => {
                let sk = Self::sk(disorder.couplings()?);
                let hop = Self::hopfield(disorder.patterns()?, 0);
                Self::combine(
                    &[((1.0 - t).sqrt() * std::f64::consts::SQRT_2, &sk), (t.sqrt(), &hop)],
                    p.n as f64 * (p.alpha() * t).sqrt(),
                )
            }
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Row `i` of the symmetric coupling matrix.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.coupling[i * self.n..(i + 1) * self.n]
    }

    /// Local fields `f_i = sum_j A_ij x_j` of a packed configuration.
    pub fn local_fields(&self, words: &[u64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let terms: Vec<f64> = self.row(i).iter().enumerate().map(|(j, a)| a * spin_at(words, j)).collect();
                pairwise_sum(&terms)
            })
            .collect()
    }

    /// Energy from scratch given precomputed local fields.
    pub fn energy_from_fields(&self, words: &[u64], fields: &[f64]) -> f64 {
        let terms: Vec<f64> = fields.iter().enumerate().map(|(i, f)| spin_at(words, i) * f).collect();
        self.offset - 0.5 * pairwise_sum(&terms)
    }

    pub fn energy(&self, x: &SpinConfiguration) -> f64 {
        let fields = self.local_fields(x.words());
        self.energy_from_fields(x.words(), &fields)
    }
}

/// Local fields and running energy of one configuration under a [`DenseForm`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    fields: Vec<f64>,
    energy: f64,
}

impl DenseState {
    pub fn new(form: &DenseForm, x: &SpinConfiguration) -> Self {
        let fields = form.local_fields(x.words());
        let energy = form.energy_from_fields(x.words(), &fields);
        Self { fields, energy }
    }

    /// `H(x with spin i flipped) - H(x)`.
    #[inline]
    pub fn delta(&self, x: &SpinConfiguration, i: usize) -> f64 {
        2.0 * x.value(i) * self.fields[i]
    }

    /// Flip spin `i`, given the `delta` returned by [`DenseState::delta`].
    #[inline]
    pub fn apply_flip(&mut self, form: &DenseForm, x: &mut SpinConfiguration, i: usize, delta: f64) {
        let c = -2.0 * x.value(i);
        for (f, a) in self.fields.iter_mut().zip(form.row(i)) {
            *f += c * a;
        }
        self.energy += delta;
        x.flip(i);
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// Largest absolute discrepancy between cached and freshly computed fields
    /// and energy.
    pub fn audit(&self, form: &DenseForm, x: &SpinConfiguration) -> f64 {
        let fresh = DenseState::new(form, x);
        self.fields
            .iter()
            .zip(&fresh.fields)
            .map(|(a, b)| (a - b).abs())
            .fold((self.energy - fresh.energy).abs(), f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::energy;
    use crate::patterns::{gen_couplings, gen_patterns, DisorderSeed, PatternDistribution, StreamRole};
    use proptest::prelude::*;
    use rand::SeedableRng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn dense_form_reproduces_energies(seed in 0u64..500, n in 2usize..10, m in 2usize..15, w in 0usize..4, i in 0usize..10) {
            let which = [Hamiltonian::Hopfield, Hamiltonian::SK_SQRT2, Hamiltonian::Interpolated { t: 0.6 }, Hamiltonian::LeaveOneOut][w];
            let xi = gen_patterns(DisorderSeed::new(seed, 2, StreamRole::Patterns), PatternDistribution::Gaussian, n, m).unwrap();
            let j = gen_couplings(DisorderSeed::new(seed, 2, StreamRole::Couplings), n).unwrap();
            let d = Disorder::both(xi, j);
            let p = ModelParams::new(n, m, 1.0, 0.0, PatternDistribution::Gaussian).unwrap();
            let form = DenseForm::for_hamiltonian(&d, which, &p).unwrap();
            let mut x = SpinConfiguration::random(n, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let e = energy(&x, &d, which, &p).unwrap();
            prop_assert!((form.energy(&x) - e).abs() < 1e-10 * e.abs().max(1.0));
            let mut st = DenseState::new(&form, &x);
            let i = i % n;
            let delta = st.delta(&x, i);
            st.apply_flip(&form, &mut x, i, delta);
            let e2 = energy(&x, &d, which, &p).unwrap();
            prop_assert!((st.energy() - e2).abs() < 1e-9);
            prop_assert!(st.audit(&form, &x) < 1e-12);
        }
    }
}
