//! Quenched disorder generation from counter-based random streams.
//!
//! A stream is identified by `(master_seed, stream_id, role)`. The ChaCha key
//! is built from the master seed and the role code; the stream id selects the
//! ChaCha stream under that key. Distinct triples therefore never share
//! keystream, and realization `k` can be regenerated without touching
//! realizations `0..k`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::error::{Error, Result};
use crate::model::{CouplingMatrix, PatternMatrix};

/// Default degrees of freedom of the heavy-tailed family: finite moments up to
/// order 11, infinite 12th moment.
pub const DEFAULT_TAIL_DOF: f64 = 12.0;

/// Pattern entry distribution. All families are symmetric with unit variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PatternDistribution {
    Bernoulli,
    Gaussian,
    /// Student-t with `dof` degrees of freedom scaled by sqrt((dof-2)/dof).
    HeavyTail { dof: f64 },
}

impl PatternDistribution {
    pub fn heavy_tail() -> Self {
        PatternDistribution::HeavyTail { dof: DEFAULT_TAIL_DOF }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PatternDistribution::HeavyTail { dof } if !(dof > 2.0 && dof.is_finite()) => Err(Error::Domain(format!(
                "heavy-tail degrees of freedom must exceed 2 for unit variance, got {dof}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for PatternDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternDistribution::Bernoulli => f.write_str("bernoulli"),
            PatternDistribution::Gaussian => f.write_str("gaussian"),
            PatternDistribution::HeavyTail { dof } if *dof == DEFAULT_TAIL_DOF => f.write_str("heavytail"),
            PatternDistribution::HeavyTail { dof } => write!(f, "heavytail:{dof}"),
        }
    }
}

impl FromStr for PatternDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let d = match s.as_str() {
            "bernoulli" => PatternDistribution::Bernoulli,
            "gaussian" => PatternDistribution::Gaussian,
            "heavytail" | "heavy_tail" | "heavy-tail" => PatternDistribution::heavy_tail(),
            other => match other.split_once(':') {
                Some(("heavytail" | "heavy_tail" | "heavy-tail", dof)) => PatternDistribution::HeavyTail {
                    dof: dof
                        .parse()
                        .map_err(|_| Error::Usage(format!("bad heavy-tail degrees of freedom `{dof}`")))?,
                },
                _ => {
                    return Err(Error::Usage(format!(
                        "unknown pattern distribution `{other}` (expected bernoulli, gaussian or heavytail)"
                    )))
                }
            },
        };
        d.validate()?;
        Ok(d)
    }
}

/// What a random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamRole {
    Patterns,
    Couplings,
    /// Monte Carlo chain `k`. Index `u32::MAX` is reserved for replica exchange.
    McChain(u32),
}

impl StreamRole {
    fn code(self) -> u64 {
        match self {
            StreamRole::Patterns => 0,
            StreamRole::Couplings => 1,
            StreamRole::McChain(k) => 2 + k as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DisorderSeed {
    pub master_seed: u64,
    pub stream_id: u64,
    pub role: StreamRole,
}

impl DisorderSeed {
    pub fn new(master_seed: u64, stream_id: u64, role: StreamRole) -> Self {
        Self {
            master_seed,
            stream_id,
            role,
        }
    }

    pub fn with_role(self, role: StreamRole) -> Self {
        Self { role, ..self }
    }

    /// The random stream for this triple.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.role.code().to_le_bytes());
        key[16..].copy_from_slice(b"hopfield-sk-lab\0");
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn draw<R: Rng>(rng: &mut R, dist: PatternDistribution, t: Option<&StudentT<f64>>) -> f64 {
    match dist {
        PatternDistribution::Bernoulli => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
        PatternDistribution::Gaussian => rng.sample(StandardNormal),
        PatternDistribution::HeavyTail { dof } => {
            let t = t.expect("student-t prepared for heavy tails");
            t.sample(rng) * ((dof - 2.0) / dof).sqrt()
        }
    }
}

/// `m` x `n` matrix of i.i.d. pattern entries, drawn row by row. Rows are a
/// prefix property of the stream: the first rows do not depend on `m`.
pub fn gen_patterns(seed: DisorderSeed, dist: PatternDistribution, n: usize, m: usize) -> Result<PatternMatrix> {
    if n == 0 || m == 0 {
        return Err(Error::Config(format!("need N >= 1 and M >= 1, got N = {n}, M = {m}")));
    }
    dist.validate()?;
    let t = match dist {
        PatternDistribution::HeavyTail { dof } => {
            Some(StudentT::new(dof).map_err(|e| Error::Domain(format!("student-t: {e}")))?)
        }
        _ => None,
    };
    let mut rng = seed.rng();
    let entries = (0..n * m).map(|_| draw(&mut rng, dist, t.as_ref())).collect();
    PatternMatrix::new(n, m, entries, dist)
}

/// `n` x `n` matrix of independent standard Gaussians.
pub fn gen_couplings(seed: DisorderSeed, n: usize) -> Result<CouplingMatrix> {
    if n == 0 {
        return Err(Error::Config("need N >= 1".into()));
    }
    let mut rng = seed.rng();
    let entries = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
    CouplingMatrix::new(n, entries)
}

/// Copy of `xi` with the first two entries of the first pattern scaled by `s`.
pub fn gen_scaled_first_pattern(xi: &PatternMatrix, s: f64) -> Result<PatternMatrix> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("scale s = {s} is outside [0, 1]")));
    }
    if xi.m() < 1 || xi.n() < 2 {
        return Err(Error::Domain("scaling the first pattern needs M >= 1 and N >= 2".into()));
    }
    let mut out = xi.clone();
    {
        let e = out.entries_mut_unchecked();
        e[0] *= s;
        e[1] *= s;
    }
    if s != 1.0 && xi.dist() == PatternDistribution::Bernoulli {
        out.set_dist(PatternDistribution::Gaussian);
    }
    Ok(out)
}
