//! Configurations, quenched disorder and the Hopfield, SK, interpolated and
//! leave-one-out Hamiltonians, plus the incremental caches used by samplers.

mod cache;
mod dense;
mod disorder;
mod energy;
mod spins;

pub use cache::{apply_flip, audit_cache, flip_delta, FlipDelta, OverlapCache};
pub use dense::{DenseForm, DenseState};
pub use disorder::{CouplingMatrix, Disorder, PatternMatrix};
pub use energy::{
    energy, energy_hopfield, energy_hopfield_leave_one_out, energy_interpolated, energy_sk, overlap,
};
pub use spins::SpinConfiguration;
pub(crate) use spins::spin_at;

use std::fmt;

use crate::error::{Error, Result};
use crate::patterns::PatternDistribution;

/// Size, temperature and field of a model instance.
///
/// `n` and `m` are the source of truth; the pattern ratio is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub m: usize,
    pub beta: f64,
    pub field: f64,
    pub dist: PatternDistribution,
}

impl ModelParams {
    pub fn new(n: usize, m: usize, beta: f64, field: f64, dist: PatternDistribution) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Config(format!("need N >= 1 and M >= 1, got N = {n}, M = {m}")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("inverse temperature must be finite and >= 0, got {beta}")));
        }
        if !field.is_finite() {
            return Err(Error::Domain(format!("external field must be finite, got {field}")));
        }
        Ok(Self { n, m, beta, field, dist })
    }

    /// Pattern ratio M/N.
    pub fn alpha(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    /// True in the regime alpha > 4 beta^2 where the overlap tail bound holds.
    pub fn overlap_regime_ok(&self) -> bool {
        self.alpha() > 4.0 * self.beta * self.beta
    }

    /// Rate `1/2 - beta/sqrt(alpha)` of the overlap tail bound.
    pub fn tail_rate(&self) -> f64 {
        0.5 - self.beta / self.alpha().sqrt()
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_field(mut self, field: f64) -> Self {
        self.field = field;
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }
}

/// Which Hamiltonian an engine works with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hamiltonian {
    Hopfield,
    /// `scale * H_SK`; a scale of sqrt(2) at inverse temperature beta gives the
    /// SK model at sqrt(2) beta.
    Sk { scale: f64 },
    /// `sqrt(1-t) sqrt(2) H_SK + sqrt(t) H_Hop + N sqrt(alpha t)`.
    Interpolated { t: f64 },
    /// Hopfield Hamiltonian without the first pattern.
    LeaveOneOut,
}

impl Hamiltonian {
    pub const SK: Hamiltonian = Hamiltonian::Sk { scale: 1.0 };
    pub const SK_SQRT2: Hamiltonian = Hamiltonian::Sk {
        scale: std::f64::consts::SQRT_2,
    };

    pub fn needs_patterns(&self) -> bool {
        !matches!(self, Hamiltonian::Sk { .. })
    }

    pub fn needs_couplings(&self) -> bool {
        matches!(self, Hamiltonian::Sk { .. } | Hamiltonian::Interpolated { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Hamiltonian::Interpolated { t } if !(0.0..=1.0).contains(&t) => {
                Err(Error::Domain(format!("interpolation parameter t = {t} is outside [0, 1]")))
            }
            Hamiltonian::Sk { scale } if !scale.is_finite() => {
                Err(Error::Domain(format!("SK scale must be finite, got {scale}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hamiltonian::Hopfield => f.write_str("hopfield"),
            Hamiltonian::Sk { scale } if *scale == 1.0 => f.write_str("sk"),
            Hamiltonian::Sk { scale } => write!(f, "sk*{scale}"),
            Hamiltonian::Interpolated { t } => write!(f, "interpolated(t={t})"),
            Hamiltonian::LeaveOneOut => f.write_str("leave-one-out"),
        }
    }
}

/// Check that disorder dimensions agree with the parameters for `which`.
pub(crate) fn check_dimensions(disorder: &Disorder, p: &ModelParams, which: Hamiltonian) -> Result<()> {
    which.validate()?;
    if which.needs_patterns() {
        let xi = disorder.patterns()?;
        if xi.n() != p.n || xi.m() != p.m {
            return Err(Error::Config(format!(
                "patterns are {}x{} but parameters say M = {}, N = {}",
                xi.m(),
                xi.n(),
                p.m,
                p.n
            )));
        }
    }
    if which.needs_couplings() {
        let j = disorder.couplings()?;
        if j.n() != p.n {
            return Err(Error::Config(format!("couplings are {0}x{0} but N = {1}", j.n(), p.n)));
        }
    }
    Ok(())
}
