//! Exact log-partition functions and Gibbs expectations by enumerating all
//! 2^N configurations.

mod gray;

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::model::{check_dimensions, DenseForm, Disorder, Hamiltonian, ModelParams};
use crate::observable::{
    assemble_overlap_statistics, overlap_statistics_observables, EnergyPart, Observable, OverlapStatistics,
};
use crate::stats::StreamingLse;

use gray::{walk, WalkForms};

/// Largest N enumerated by default (2^26 ≈ 6.7e7 configurations).
pub const DEFAULT_ENUMERATION_CAP: usize = 26;
/// Hard limit imposed by the single-word configuration encoding.
pub const MAX_ENUMERATION_CAP: usize = 40;

/// Default step for finite differences in t.
pub const DEFAULT_T_STEP: f64 = 1e-5;
/// Default step for finite differences in a pattern entry.
pub const DEFAULT_PATTERN_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LseMode {
    /// Single pass with a running maximum.
    #[default]
    Streaming,
    /// First pass finds the maximum exponent, second pass sums.
    TwoPass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    pub cap: usize,
    pub lse: LseMode,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_ENUMERATION_CAP,
            lse: LseMode::Streaming,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub log_z: f64,
    /// log Z / N.
    pub free_energy: f64,
    /// Largest exponent -beta H + B sum x seen during enumeration.
    pub max_exponent: f64,
    pub params: ModelParams,
    pub which: Hamiltonian,
    pub wall_time: Duration,
}

/// Log-partition function plus Gibbs averages of a list of observables.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactExpectations {
    pub result: ExactResult,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsExpectation {
    pub value: f64,
    pub observable: Observable,
}

/// An analytic derivative alongside its central finite-difference estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    pub analytic: f64,
    pub finite_diff: f64,
    pub step: f64,
}

impl DerivativeCheck {
    pub fn discrepancy(&self) -> f64 {
        (self.analytic - self.finite_diff).abs()
    }
}

/// Observable differentiated in the pattern-derivative check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffruleObservable {
    /// x_1 x_2
    SpinPair,
    /// x_i S for the perturbed site i
    SiteOverlap,
}

fn check_capacity(n: usize, opts: &ExactOptions) -> Result<()> {
    let cap = opts.cap.min(MAX_ENUMERATION_CAP);
    if n > cap {
        return Err(Error::Capacity { n, cap });
    }
    Ok(())
}

fn part_form(disorder: &Disorder, part: EnergyPart) -> Result<DenseForm> {
    Ok(match part {
        EnergyPart::Hopfield => DenseForm::hopfield(disorder.patterns()?, 0),
        EnergyPart::Sk => DenseForm::sk(disorder.couplings()?),
    })
}

/// Enumerate once, accumulating log Z and the listed observables.
pub fn exact_expectations(
    disorder: &Disorder,
    p: &ModelParams,
    which: Hamiltonian,
    observables: &[Observable],
    opts: &ExactOptions,
) -> Result<ExactExpectations> {
    let start = Instant::now();
    check_capacity(p.n, opts)?;
    check_dimensions(disorder, p, which)?;
    let overlap_vector = disorder.first_pattern();
    if observables.iter().any(Observable::needs_overlap) && overlap_vector.is_none() {
        return Err(Error::Config("overlap observables need a pattern matrix".into()));
    }
    if let Some(site) = observables.iter().filter_map(Observable::max_site).max() {
        if site >= p.n {
            return Err(Error::Config(format!("observable references site {site} but N = {}", p.n)));
        }
    }
    let total = DenseForm::for_hamiltonian(disorder, which, p)?;
    let mut wanted: Vec<EnergyPart> = observables.iter().filter_map(Observable::part).collect();
    wanted.dedup();
    let part_forms: Vec<(usize, DenseForm)> = wanted
        .iter()
        .map(|&part| Ok((part.index(), part_form(disorder, part)?)))
        .collect::<Result<_>>()?;
    let forms = WalkForms {
        total: &total,
        parts: part_forms.iter().map(|(k, f)| (*k, f)).collect(),
        overlap_vector,
    };

    let beta = p.beta;
    let field = p.field;
    let log_weight = move |energy: f64, mag: i64| -beta * energy + field * mag as f64;
    let mut values = vec![0.0; observables.len()];

    let (log_z, max_exponent, averages) = match opts.lse {
        LseMode::Streaming => {
            let mut lse = StreamingLse::new(observables.len());
            walk(&forms, p.n, |v| {
                for (slot, o) in values.iter_mut().zip(observables) {
                    *slot = o.eval(v);
                }
                lse.push(log_weight(v.energy, v.magnetization), &values);
            });
            (lse.log_sum(), lse.max_exponent(), lse.averages())
        }
        LseMode::TwoPass => {
            let mut max = f64::NEG_INFINITY;
            walk(&forms, p.n, |v| max = max.max(log_weight(v.energy, v.magnetization)));
            let mut sum = 0.0;
            let mut acc = vec![0.0; observables.len()];
            walk(&forms, p.n, |v| {
                let w = (log_weight(v.energy, v.magnetization) - max).exp();
                sum += w;
                for (a, o) in acc.iter_mut().zip(observables) {
                    *a += w * o.eval(v);
                }
            });
            (max + sum.ln(), max, acc.iter().map(|a| a / sum).collect())
        }
    };

    if !log_z.is_finite() {
        return Err(Error::Disorder(format!(
            "log partition function is not finite ({log_z}); check the disorder for extreme entries"
        )));
    }
    let result = ExactResult {
        log_z,
        free_energy: log_z / p.n as f64,
        max_exponent,
        params: *p,
        which,
        wall_time: start.elapsed(),
    };
    Ok(ExactExpectations {
        result,
        values: averages,
    })
}

/// log Z and F = log Z / N.
pub fn exact_log_partition(
    disorder: &Disorder,
    p: &ModelParams,
    which: Hamiltonian,
    opts: &ExactOptions,
) -> Result<ExactResult> {
    Ok(exact_expectations(disorder, p, which, &[], opts)?.result)
}

pub fn exact_gibbs_expectation(
    disorder: &Disorder,
    p: &ModelParams,
    which: Hamiltonian,
    observable: Observable,
    opts: &ExactOptions,
) -> Result<GibbsExpectation> {
    let e = exact_expectations(disorder, p, which, std::slice::from_ref(&observable), opts)?;
    Ok(GibbsExpectation {
        value: e.values[0],
        observable,
    })
}

/// Overlap moments d = 1..4, tail G(S^2 > r) for r = 0..=r_max and the
/// exponential moment <exp(c S^2)>, all from one enumeration.
pub fn exact_overlap_statistics(
    disorder: &Disorder,
    p: &ModelParams,
    which: Hamiltonian,
    c: f64,
    r_max: usize,
    opts: &ExactOptions,
) -> Result<OverlapStatistics> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("exponential-moment coefficient must be >= 0, got {c}")));
    }
    let obs = overlap_statistics_observables(c, r_max);
    let e = exact_expectations(disorder, p, which, &obs, opts)?;
    Ok(assemble_overlap_statistics(&e.values, c))
}

/// dF_t/dt per disorder realization: the analytic value
/// `-(beta/N) <dH_t/dt>` next to a central difference of exact F_t.
pub fn exact_interpolation_derivative(
    disorder: &Disorder,
    p: &ModelParams,
    t: f64,
    step: f64,
    opts: &ExactOptions,
) -> Result<DerivativeCheck> {
    if !(step > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {step}")));
    }
    if !(t > 10.0 * step && t < 1.0 - 10.0 * step) {
        return Err(Error::Domain(format!(
            "t = {t} is within 10 steps ({step}) of an endpoint where dH_t/dt is singular"
        )));
    }
    let which = Hamiltonian::Interpolated { t };
    let obs = [Observable::Part(EnergyPart::Sk), Observable::Part(EnergyPart::Hopfield)];
    let e = exact_expectations(disorder, p, which, &obs, opts)?;
    let (h_sk, h_hop) = (e.values[0], e.values[1]);
    let n = p.n as f64;
    let dh_dt = -std::f64::consts::SQRT_2 / (2.0 * (1.0 - t).sqrt()) * h_sk
        + h_hop / (2.0 * t.sqrt())
        + n * p.alpha().sqrt() / (2.0 * t.sqrt());
    let analytic = -p.beta / n * dh_dt;
    let f_plus = exact_log_partition(disorder, p, Hamiltonian::Interpolated { t: t + step }, opts)?.free_energy;
    let f_minus = exact_log_partition(disorder, p, Hamiltonian::Interpolated { t: t - step }, opts)?.free_energy;
    Ok(DerivativeCheck {
        analytic,
        finite_diff: (f_plus - f_minus) / (2.0 * step),
        step,
    })
}

fn diffrule_model(t: f64) -> Result<Hamiltonian> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("interpolation parameter t = {t} is outside [0, 1]")));
    }
    Ok(if t == 1.0 {
        Hamiltonian::Hopfield
    } else {
        Hamiltonian::Interpolated { t }
    })
}

/// Derivative of <g> with respect to the pattern entry xi^1_i, analytically as
/// `<dg/dxi> + (2 beta sqrt(t)/sqrt(M)) (<g x_i S> - <g><x_i S>)` and by a
/// central difference in that single entry. `site` is 0-based.
pub fn exact_diffrule_check(
    disorder: &Disorder,
    p: &ModelParams,
    t: f64,
    site: usize,
    g: DiffruleObservable,
    step: f64,
    opts: &ExactOptions,
) -> Result<DerivativeCheck> {
    let which = diffrule_model(t)?;
    if site >= p.n || p.n < 2 {
        return Err(Error::Domain(format!("site {site} is out of range for N = {}", p.n)));
    }
    if !(step > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {step}")));
    }
    let (g_obs, g_xs, dg) = match g {
        DiffruleObservable::SpinPair => (
            Observable::spin_pair(0, 1),
            Observable::spins_times_overlap(&[0, 1, site], 1),
            0.0,
        ),
        DiffruleObservable::SiteOverlap => (
            Observable::spins_times_overlap(&[site], 1),
            // x_i S x_i S = S^2
            Observable::overlap_pow(2),
            1.0 / (p.n as f64).sqrt(),
        ),
    };
    let xs = Observable::spins_times_overlap(&[site], 1);
    let e = exact_expectations(disorder, p, which, &[g_obs.clone(), g_xs, xs], opts)?;
    let (g_mean, gxs_mean, xs_mean) = (e.values[0], e.values[1], e.values[2]);
    let coef = 2.0 * p.beta * t.sqrt() / (p.m as f64).sqrt();
    let analytic = dg + coef * (gxs_mean - g_mean * xs_mean);

    let xi = disorder.patterns()?;
    let base = xi.get(0, site);
    let probe = |value: f64| -> Result<f64> {
        let perturbed = Disorder {
            patterns: Some(xi.with_entry(0, site, value)),
            couplings: disorder.couplings.clone(),
        };
        Ok(exact_gibbs_expectation(&perturbed, p, which, g_obs.clone(), opts)?.value)
    };
    let finite_diff = (probe(base + step)? - probe(base - step)?) / (2.0 * step);
    Ok(DerivativeCheck {
        analytic,
        finite_diff,
        step,
    })
}
