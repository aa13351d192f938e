//! Single Metropolis chains with incremental energy bookkeeping.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    apply_flip, audit_cache, check_dimensions, energy, flip_delta, DenseForm, DenseState, Disorder, Hamiltonian,
    ModelParams, OverlapCache, SpinConfiguration,
};
use crate::observable::{Observable, StateView};
use crate::patterns::DisorderSeed;

/// Largest N for which the automatic backend builds an N x N coupling matrix.
const DENSE_AUTO_LIMIT: usize = 2048;

/// How a chain keeps its flip deltas up to date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CacheBackend {
    /// Dense effective couplings when they are no more expensive than the
    /// overlap cache and fit comfortably in memory.
    #[default]
    Auto,
    /// O(N) per flip through an N x N effective coupling matrix.
    Dense,
    /// O(M) per flip through pattern overlaps, O(N) through SK fields.
    Overlap,
}

enum Kernel {
    Dense(DenseForm),
    Overlap,
}

/// Disorder, parameters and precomputed kernel shared by every chain of a run.
pub struct Sampler<'a> {
    disorder: &'a Disorder,
    p: ModelParams,
    which: Hamiltonian,
    kernel: Kernel,
    overlap_vector: Option<&'a [f64]>,
    inv_sqrt_n: f64,
}

#[derive(Debug, Clone)]
enum ChainCache {
    Dense(DenseState),
    Overlap(OverlapCache),
}

/// One Markov chain: configuration, cache and private random stream.
#[derive(Debug, Clone)]
pub struct ChainState {
    x: SpinConfiguration,
    cache: ChainCache,
    energy: f64,
    overlap_raw: f64,
    magnetization: i64,
    rng: ChaCha8Rng,
    sweeps: u64,
    accepted: u64,
}

impl ChainState {
    pub fn config(&self) -> &SpinConfiguration {
        &self.x
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    /// Fraction of proposals accepted so far.
    pub fn acceptance_rate(&self) -> f64 {
        if self.sweeps == 0 {
            return 0.0;
        }
        self.accepted as f64 / (self.sweeps * self.x.len() as u64) as f64
    }
}

impl<'a> Sampler<'a> {
    pub fn new(disorder: &'a Disorder, p: &ModelParams, which: Hamiltonian, backend: CacheBackend) -> Result<Self> {
        check_dimensions(disorder, p, which)?;
        let dense = match backend {
            CacheBackend::Dense => true,
            CacheBackend::Overlap => false,
            CacheBackend::Auto => p.n <= DENSE_AUTO_LIMIT && (!which.needs_patterns() || p.m >= p.n),
        };
        let kernel = if dense {
            Kernel::Dense(DenseForm::for_hamiltonian(disorder, which, p)?)
        } else {
            Kernel::Overlap
        };
        Ok(Self {
            disorder,
            p: *p,
            which,
            kernel,
            overlap_vector: disorder.first_pattern(),
            inv_sqrt_n: 1.0 / (p.n as f64).sqrt(),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.p
    }

    pub fn which(&self) -> Hamiltonian {
        self.which
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.kernel, Kernel::Dense(_))
    }

    /// Reject observables a sampled chain cannot evaluate.
    pub fn check_observables(&self, observables: &[Observable]) -> Result<()> {
        for o in observables {
            if o.part().is_some() {
                return Err(Error::Config(format!("observable {o} is only available from exact enumeration")));
            }
            if o.needs_overlap() && self.overlap_vector.is_none() {
                return Err(Error::Config("overlap observables need a pattern matrix".into()));
            }
            if o.max_site().is_some_and(|s| s >= self.p.n) {
                return Err(Error::Config(format!("observable {o} references a site beyond N = {}", self.p.n)));
            }
        }
        Ok(())
    }

    /// Chain started from a uniformly random configuration drawn from `seed`'s
    /// stream, which then drives the Metropolis decisions.
    pub fn new_chain(&self, seed: DisorderSeed) -> Result<ChainState> {
        let mut rng = seed.rng();
        let x = SpinConfiguration::random(self.p.n, &mut rng);
        self.chain_from(x, rng)
    }

    pub fn chain_from(&self, x: SpinConfiguration, rng: ChaCha8Rng) -> Result<ChainState> {
        if x.len() != self.p.n {
            return Err(Error::Config(format!("configuration has {} sites but N = {}", x.len(), self.p.n)));
        }
        let (cache, energy) = self.fresh_cache(&x)?;
        Ok(ChainState {
            overlap_raw: self.overlap_vector.map_or(0.0, |v| x.dot(v)),
            magnetization: x.magnetization(),
            x,
            cache,
            energy,
            rng,
            sweeps: 0,
            accepted: 0,
        })
    }

    fn fresh_cache(&self, x: &SpinConfiguration) -> Result<(ChainCache, f64)> {
        Ok(match &self.kernel {
            Kernel::Dense(form) => {
                let st = DenseState::new(form, x);
                let e = st.energy();
                (ChainCache::Dense(st), e)
            }
            Kernel::Overlap => {
                let c = OverlapCache::new(x, self.disorder, self.which, &self.p)?;
                (ChainCache::Overlap(c), energy(x, self.disorder, self.which, &self.p)?)
            }
        })
    }

    /// Replace the configuration by an independent draw from the beta = 0
    /// Gibbs measure, under which spins are independent with
    /// P(x_i = +1) = (1 + tanh B) / 2.
    ///
    /// At beta = 0 and B = 0 a sequential Metropolis sweep accepts every flip
    /// and maps x to -x, so it never mixes; tempering uses this instead.
    pub fn infinite_temperature_draw(&self, state: &mut ChainState) {
        let up = 0.5 * (1.0 + self.p.field.tanh());
        let spins: Vec<i8> = (0..self.p.n)
            .map(|_| if state.rng.random::<f64>() < up { 1 } else { -1 })
            .collect();
        let x = SpinConfiguration::from_spins(&spins).expect("entries are +-1");
        let (cache, energy) = self.fresh_cache(&x).expect("dimensions checked at construction");
        state.overlap_raw = self.overlap_vector.map_or(0.0, |v| x.dot(v));
        state.magnetization = x.magnetization();
        state.x = x;
        state.cache = cache;
        state.energy = energy;
        state.sweeps += 1;
    }

    /// One sequential sweep over sites 0..N at inverse temperature `beta`.
    /// Returns the number of accepted flips.
    pub fn metropolis_sweep(&self, state: &mut ChainState, beta: f64) -> usize {
        let accepted = (0..self.p.n).filter(|&i| self.metropolis_update(state, beta, i)).count();
        state.sweeps += 1;
        state.accepted += accepted as u64;
        accepted
    }

    /// Propose flipping site `i` and accept with probability
    /// min(1, exp(-beta dE + B (x'_i - x_i))). Returns whether it flipped.
    pub fn metropolis_update(&self, state: &mut ChainState, beta: f64, i: usize) -> bool {
        let old = state.x.value(i);
        let de = match (&self.kernel, &state.cache) {
            (Kernel::Dense(_), ChainCache::Dense(st)) => st.delta(&state.x, i),
            (Kernel::Overlap, ChainCache::Overlap(c)) => flip_delta(&state.x, c, i, self.which, self.disorder, &self.p).energy,
            _ => unreachable!("chain built by a different sampler"),
        };
        let log_acc = -beta * de - 2.0 * self.p.field * old;
        if !(log_acc >= 0.0 || state.rng.random::<f64>() < log_acc.exp()) {
            return false;
        }
        match (&self.kernel, &mut state.cache) {
            (Kernel::Dense(form), ChainCache::Dense(st)) => {
                st.apply_flip(form, &mut state.x, i, de);
                state.energy = st.energy();
            }
            (Kernel::Overlap, ChainCache::Overlap(c)) => {
                apply_flip(&mut state.x, c, i, self.disorder);
                state.energy += de;
            }
            _ => unreachable!("chain built by a different sampler"),
        }
        if let Some(v) = self.overlap_vector {
            state.overlap_raw -= 2.0 * old * v[i];
        }
        state.magnetization -= 2 * old as i64;
        true
    }

    /// View of the chain's current state for observable evaluation.
    pub fn view<'s>(&self, state: &'s ChainState) -> StateView<'s> {
        StateView {
            words: state.x.words(),
            n: self.p.n,
            energy: state.energy,
            overlap_raw: state.overlap_raw,
            inv_sqrt_n: self.inv_sqrt_n,
            magnetization: state.magnetization,
            parts: [0.0; 2],
        }
    }

    /// Worst discrepancy between every running quantity of the chain and its
    /// from-scratch value.
    pub fn audit(&self, state: &ChainState) -> f64 {
        let cache_gap = match (&self.kernel, &state.cache) {
            (Kernel::Dense(form), ChainCache::Dense(st)) => st.audit(form, &state.x),
            (Kernel::Overlap, ChainCache::Overlap(c)) => audit_cache(&state.x, c, self.disorder),
            _ => f64::INFINITY,
        };
        let fresh = energy(&state.x, self.disorder, self.which, &self.p).unwrap_or(f64::NAN);
        let overlap = self.overlap_vector.map_or(0.0, |v| state.x.dot(v));
        let mag_gap = (state.magnetization - state.x.magnetization()).abs() as f64;
        let gaps = [cache_gap, (fresh - state.energy).abs(), (overlap - state.overlap_raw).abs(), mag_gap];
        gaps.into_iter().fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
    }
}

/// Swap the dynamical content of two chains, keeping their random streams
/// attached to their ladder slots.
pub(crate) fn swap_configurations(a: &mut ChainState, b: &mut ChainState) {
    std::mem::swap(&mut a.x, &mut b.x);
    std::mem::swap(&mut a.cache, &mut b.cache);
    std::mem::swap(&mut a.energy, &mut b.energy);
    std::mem::swap(&mut a.overlap_raw, &mut b.overlap_raw);
    std::mem::swap(&mut a.magnetization, &mut b.magnetization);
}
