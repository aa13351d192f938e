//! Fixed catalogue of Gibbs observables. Engines evaluate a list of these in a
//! single pass over configurations (exact) or samples (Monte Carlo).

use std::fmt;

use crate::model::spin_at;

/// Which unscaled energy component to track alongside the total energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyPart {
    Hopfield,
    Sk,
}

impl EnergyPart {
    pub(crate) fn index(self) -> usize {
        match self {
            EnergyPart::Hopfield => 0,
            EnergyPart::Sk => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    One,
    /// Total energy H (including any constant shift).
    Energy,
    /// H / N.
    EnergyPerSite,
    /// Unscaled H_Hop or H_SK of the current configuration.
    Part(EnergyPart),
    /// sum_i x_i / N.
    Magnetization,
    /// `prod_{s in sites} x_s * S^power`; covers x_1 x_2, x_i S, S^2, x_1 x_2 S^2 ...
    Monomial { sites: Vec<usize>, overlap_power: u32 },
    /// |S|^d.
    AbsOverlapPow(f64),
    /// exp(c S^2).
    ExpOverlapSq(f64),
    /// Indicator of S^2 > r.
    OverlapSqAbove(f64),
}

impl Observable {
    pub fn spin_pair(i: usize, j: usize) -> Self {
        Observable::Monomial {
            sites: vec![i, j],
            overlap_power: 0,
        }
    }

    pub fn overlap_pow(p: u32) -> Self {
        Observable::Monomial {
            sites: Vec::new(),
            overlap_power: p,
        }
    }

    pub fn spins_times_overlap(sites: &[usize], p: u32) -> Self {
        Observable::Monomial {
            sites: sites.to_vec(),
            overlap_power: p,
        }
    }

    pub fn needs_overlap(&self) -> bool {
        match self {
            Observable::Monomial { overlap_power, .. } => *overlap_power > 0,
            Observable::AbsOverlapPow(_) | Observable::ExpOverlapSq(_) | Observable::OverlapSqAbove(_) => true,
            _ => false,
        }
    }

    pub fn part(&self) -> Option<EnergyPart> {
        match self {
            Observable::Part(p) => Some(*p),
            _ => None,
        }
    }

    /// Largest site index referenced, if any.
    pub fn max_site(&self) -> Option<usize> {
        match self {
            Observable::Monomial { sites, .. } => sites.iter().copied().max(),
            _ => None,
        }
    }

    #[inline]
    pub fn eval(&self, v: &StateView<'_>) -> f64 {
        match self {
            Observable::One => 1.0,
            Observable::Energy => v.energy,
            Observable::EnergyPerSite => v.energy / v.n as f64,
            Observable::Part(p) => v.parts[p.index()],
            Observable::Magnetization => v.magnetization as f64 / v.n as f64,
            Observable::Monomial { sites, overlap_power } => {
                let mut prod = 1.0;
                for &s in sites {
                    prod *= spin_at(v.words, s);
                }
                if *overlap_power > 0 {
                    prod *= v.overlap().powi(*overlap_power as i32);
                }
                prod
            }
            Observable::AbsOverlapPow(d) => v.overlap().abs().powf(*d),
            Observable::ExpOverlapSq(c) => (c * v.overlap_sq()).exp(),
            Observable::OverlapSqAbove(r) => {
                // raw^2 > r N avoids dividing before comparing
                if v.overlap_raw * v.overlap_raw > r * v.n as f64 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::One => f.write_str("1"),
            Observable::Energy => f.write_str("H"),
            Observable::EnergyPerSite => f.write_str("H/N"),
            Observable::Part(EnergyPart::Hopfield) => f.write_str("H_hop"),
            Observable::Part(EnergyPart::Sk) => f.write_str("H_sk"),
            Observable::Magnetization => f.write_str("m"),
            Observable::Monomial { sites, overlap_power } => {
                for s in sites {
                    write!(f, "x{}", s + 1)?;
                }
                match overlap_power {
                    0 if sites.is_empty() => f.write_str("1"),
                    0 => Ok(()),
                    1 => f.write_str("S"),
                    p => write!(f, "S^{p}"),
                }
            }
            Observable::AbsOverlapPow(d) => write!(f, "|S|^{d}"),
            Observable::ExpOverlapSq(c) => write!(f, "exp({c} S^2)"),
            Observable::OverlapSqAbove(r) => write!(f, "1[S^2>{r}]"),
        }
    }
}

/// Everything an observable may look at for one configuration.
#[derive(Debug, Clone, Copy)]
pub struct StateView<'a> {
    pub words: &'a [u64],
    pub n: usize,
    pub energy: f64,
    /// x . xi^1 (0 when there are no patterns).
    pub overlap_raw: f64,
    pub inv_sqrt_n: f64,
    pub magnetization: i64,
    /// Unscaled [H_hop, H_sk] when tracked.
    pub parts: [f64; 2],
}

impl StateView<'_> {
    #[inline]
    pub fn overlap(&self) -> f64 {
        self.overlap_raw * self.inv_sqrt_n
    }

    #[inline]
    pub fn overlap_sq(&self) -> f64 {
        self.overlap_raw * self.overlap_raw / self.n as f64
    }
}

/// Overlap moments, tail and exponential moment. `T` is `f64` for exact
/// results and an estimate-with-error for sampled ones.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapStatistics<T = f64> {
    /// <|S|^d> for d = 1, 2, 3, 4.
    pub moments: [T; 4],
    /// G(S^2 > r) for r = 0, 1, ..., r_max.
    pub tail: Vec<T>,
    pub c: f64,
    /// <exp(c S^2)>.
    pub exp_moment: T,
}

/// Observables backing [`OverlapStatistics`], in the order
/// moments, exp moment, tail.
pub(crate) fn overlap_statistics_observables(c: f64, r_max: usize) -> Vec<Observable> {
    let mut obs: Vec<Observable> = (1..=4).map(|d| Observable::AbsOverlapPow(d as f64)).collect();
    obs.push(Observable::ExpOverlapSq(c));
    obs.extend((0..=r_max).map(|r| Observable::OverlapSqAbove(r as f64)));
    obs
}

pub(crate) fn assemble_overlap_statistics<T: Clone>(values: &[T], c: f64) -> OverlapStatistics<T> {
    OverlapStatistics {
        moments: [values[0].clone(), values[1].clone(), values[2].clone(), values[3].clone()],
        exp_moment: values[4].clone(),
        tail: values[5..].to_vec(),
        c,
    }
}
