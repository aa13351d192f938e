//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and a
//! summary. Failures are reported, not fatal, unless `ACCEPTANCE_STRICT=1` is
//! set. Pass criterion numbers as arguments to run a subset.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{gibbs_weights, instance, naive_expectation, naive_free_energy, params};
use spinglass::cli::{execute, parse_cli, resolve_workers};
use spinglass::exact::{
    exact_diffrule_check, exact_interpolation_derivative, exact_log_partition, DiffruleObservable, ExactOptions,
};
use spinglass::experiments::*;
use spinglass::mc::{disorder_average, disorder_map, thermo_integration_free_energy, CacheBackend, Sampler};
use spinglass::model::{Disorder, Hamiltonian, ModelParams};
use spinglass::patterns::{DisorderSeed, PatternDistribution, StreamRole};

const SEED: u64 = 42;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn workers() -> usize {
    resolve_workers(None)
}

fn log_two_cosh(b: f64) -> f64 {
    (2.0 * b.cosh()).ln()
}

fn exact_f(d: &Disorder, p: &ModelParams, which: Hamiltonian) -> f64 {
    exact_log_partition(d, p, which, &ExactOptions::default()).unwrap().free_energy
}

fn families() -> [PatternDistribution; 3] {
    [PatternDistribution::Bernoulli, PatternDistribution::Gaussian, PatternDistribution::heavy_tail()]
}

fn oracle_equivalence() -> Outcome {
    let (n, m) = (12, 24);
    let start = Instant::now();
    let mut worst = 0f64;
    for (s, dist) in families().into_iter().enumerate() {
        let d = instance(SEED, s as u64, dist, n, m);
        let p = params(n, m, 0.8, 0.3, dist);
        let mut models = vec![Hamiltonian::Hopfield];
        if s == 0 {
            models.push(Hamiltonian::SK);
        }
        for which in models {
            worst = worst.max((exact_f(&d, &p, which) - naive_free_energy(&d, &p, which)).abs());
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-10 && elapsed < Duration::from_secs(5),
        format!("max |fast - naive| = {worst:.2e}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn closed_forms() -> Outcome {
    let mut worst_hot = 0f64;
    for (s, dist) in families().into_iter().enumerate() {
        let d = instance(SEED, 10 + s as u64, dist, 10, 30);
        for field in [0.0, 0.7, -1.3] {
            let p = params(10, 30, 0.0, field, dist);
            for which in [Hamiltonian::Hopfield, Hamiltonian::LeaveOneOut, Hamiltonian::SK, Hamiltonian::Interpolated { t: 0.4 }] {
                worst_hot = worst_hot.max((exact_f(&d, &p, which) - log_two_cosh(field)).abs());
            }
        }
    }
    let mut worst_single = 0f64;
    for m in [1, 5, 16] {
        let d = instance(SEED, 20 + m as u64, PatternDistribution::Bernoulli, 1, m);
        for (beta, field) in [(0.3, 0.0), (1.7, 0.4), (4.0, -2.0)] {
            let p = params(1, m, beta, field, PatternDistribution::Bernoulli);
            let want = beta * (m as f64).sqrt() + log_two_cosh(field);
            worst_single = worst_single.max((exact_f(&d, &p, Hamiltonian::Hopfield) - want).abs());
        }
    }
    check(
        worst_hot <= 1e-12 && worst_single <= 1e-12,
        format!("beta = 0 max error {worst_hot:.2e}, N = 1 max error {worst_single:.2e}"),
    )
}

fn derivative_identities() -> Outcome {
    let (n, m) = (8, 16);
    let dist = PatternDistribution::Gaussian;
    let d = instance(SEED, 30, dist, n, m);
    let p = params(n, m, 1.0, 0.2, dist);
    let opts = ExactOptions::default();
    let oracle_f = |t: f64| naive_free_energy(&d, &p, Hamiltonian::Interpolated { t });

    let mut worst_deriv = 0f64;
    for t in [0.25, 0.5, 0.75] {
        let h = 1e-5;
        let c = exact_interpolation_derivative(&d, &p, t, h, &opts).unwrap();
        let fd = (oracle_f(t + h) - oracle_f(t - h)) / (2.0 * h);
        worst_deriv = worst_deriv.max((c.analytic - fd).abs()).max(c.discrepancy());
    }

    let xi = d.patterns.as_ref().unwrap();
    let mut worst_rule = 0f64;
    for t in [0.5, 1.0] {
        let which = if t == 1.0 { Hamiltonian::Hopfield } else { Hamiltonian::Interpolated { t } };
        for g in [DiffruleObservable::SpinPair, DiffruleObservable::SiteOverlap] {
            for site in [0, 5] {
                let c = exact_diffrule_check(&d, &p, t, site, g, 1e-4, &opts).unwrap();
                let at = |v: f64| {
                    let dd = Disorder {
                        patterns: Some(xi.with_entry(0, site, v)),
                        couplings: d.couplings.clone(),
                    };
                    naive_expectation(&dd, &p, which, |x, s| match g {
                        DiffruleObservable::SpinPair => x[0] * x[1],
                        DiffruleObservable::SiteOverlap => x[site] * s,
                    })
                };
                let (base, h) = (xi.get(0, site), 1e-4);
                let fd = (at(base + h) - at(base - h)) / (2.0 * h);
                worst_rule = worst_rule.max((c.analytic - fd).abs()).max(c.discrepancy());
            }
        }
    }

    let err = |h: f64| {
        let c = exact_interpolation_derivative(&d, &p, 0.5, h, &opts).unwrap();
        c.discrepancy()
    };
    let (e1, e2, e3) = (err(0.02), err(0.01), err(0.005));
    let ratios = [e1 / e2, e2 / e3];
    let second_order = ratios.iter().all(|r| (3.5..=4.5).contains(r));
    check(
        worst_deriv <= 1e-6 && worst_rule <= 1e-6 && second_order,
        format!(
            "dF/dt max error {worst_deriv:.2e}, pattern rule max error {worst_rule:.2e}, halving ratios {:.3} {:.3}",
            ratios[0], ratios[1]
        ),
    )
}

fn interpolation_endpoints() -> Outcome {
    let (n, m) = (10, 40);
    let mut worst = 0f64;
    for r in 0..20 {
        let d = instance(SEED, 40 + r, PatternDistribution::Gaussian, n, m);
        let p = params(n, m, 0.8, 0.3, PatternDistribution::Gaussian);
        let f = |which| exact_f(&d, &p, which);
        let gap0 = (f(Hamiltonian::Interpolated { t: 0.0 }) - f(Hamiltonian::SK_SQRT2)).abs();
        let gap1 = (f(Hamiltonian::Interpolated { t: 1.0 }) - (f(Hamiltonian::Hopfield) - p.beta * p.alpha().sqrt())).abs();
        worst = worst.max(gap0).max(gap1);
    }
    check(worst <= 1e-12, format!("max endpoint gap over 20 realizations {worst:.2e}"))
}

fn residual_decay() -> Outcome {
    let t = run_theorem1(&Theorem1Config {
        alphas: vec![4.0, 16.0, 64.0],
        beta: 0.5,
        field: 0.0,
        n: 16,
        dist: PatternDistribution::Gaussian,
        engine: Engine::default(),
        ensemble: EnsembleConfig::new(SEED, 200, workers()),
    })
    .unwrap();
    let (first, last) = (t.rows[0].residual, t.rows[2].residual);
    let tol = 3.0 * (last.std_error.powi(2) + (first.std_error / 2.0).powi(2)).sqrt();
    let lhs = last.mean.abs();
    let rhs = first.mean.abs() / 2.0 + tol;
    let table: Vec<String> = t
        .rows
        .iter()
        .map(|r| format!("{}: {:+.5} +- {:.5}", r.alpha, r.residual.mean, r.residual.std_error))
        .collect();
    check(lhs <= rhs, format!("residuals [{}], |D(64)| = {lhs:.5} <= {rhs:.5}", table.join(", ")))
}

fn high_temperature() -> Outcome {
    let (n, alpha, beta) = (16, 25.0, 0.25);
    let m = 400;
    let dist = PatternDistribution::Gaussian;
    let expansion = beta * f64::sqrt(alpha) + 2f64.ln() + beta * beta;
    if (expansion - 2.005647).abs() > 1e-6 {
        return Err(format!("expansion oracle evaluates to {expansion}, not 2.005647"));
    }
    // E[Z] for Gaussian patterns: each pattern contributes (1 - 2 beta/sqrt(alpha))^(-1/2).
    let annealed = 2f64.ln() - alpha / 2.0 * (1.0 - 2.0 * beta / alpha.sqrt()).ln();
    let ens = EnsembleConfig::new(SEED, 200, workers());
    let p = params(n, m, beta, 0.0, dist);
    let avg = disorder_average(200, ens.workers, |r| {
        Ok(exact_f(&ens.patterns(r, dist, n, m)?, &p, Hamiltonian::Hopfield))
    })
    .unwrap()
    .estimate;
    check(
        (avg.mean - expansion).abs() <= 0.02,
        format!(
            "E[F_Hop] = {:.5} +- {:.5}, expansion {expansion:.6}, annealed {annealed:.6}",
            avg.mean, avg.std_error
        ),
    )
}

fn figure_shape() -> Outcome {
    let alphas: Vec<f64> = (9..=25).map(f64::from).collect();
    let data = run_figure1(&Figure1Config {
        n: 20,
        alphas: alphas.clone(),
        panels: vec![(1.0, 0.0)],
        dist: PatternDistribution::Bernoulli,
        n_sk: 100,
        n_hop_per_alpha: 100,
        engine: Engine::MonteCarlo(McSettings::default()),
        master_seed: SEED,
        workers: workers(),
    })
    .unwrap();
    let panel = &data.panels[0];
    let res: Vec<f64> = panel.points.iter().map(|pt| pt.f_hop.mean - pt.curve).collect();
    let third = res.len() / 3;
    let head = res[..third].iter().map(|r| r.abs()).sum::<f64>() / third as f64;
    let tail = res[res.len() - third..].iter().map(|r| r.abs()).sum::<f64>() / third as f64;
    let worst = res.iter().fold(0f64, |a, r| a.max(r.abs()));
    let listing: Vec<String> = alphas.iter().zip(&res).map(|(a, r)| format!("{a}:{r:+.4}")).collect();
    check(
        worst <= 0.15 && tail < head,
        format!(
            "P_hat = {:.5} +- {:.5}, max |residual| {worst:.4}, mean |residual| first third {head:.4}, last third {tail:.4}, residuals [{}]",
            panel.p_hat.mean,
            panel.p_hat.std_error,
            listing.join(" ")
        ),
    )
}

fn overlap_tail() -> Outcome {
    let fit = run_overlap_tail(&OverlapTailConfig {
        params: params(16, 256, 0.5, 0.0, PatternDistribution::Bernoulli),
        r_max: 10,
        fit_range: (1, 8),
        engine: Engine::default(),
        ensemble: EnsembleConfig::new(SEED, 100, workers()),
    })
    .unwrap();
    let a = fit.theoretical_rate();
    check(
        fit.rate >= 0.8 * a,
        format!("fitted rate {:.4} +- {:.4}, bound rate a = {a}, ratio {:.3}", fit.rate, fit.rate_se, fit.rate_ratio()),
    )
}

fn exp_moment_uniformity() -> Outcome {
    let (alpha, beta) = (16.0, 0.5);
    let a = 0.5 - beta / f64::sqrt(alpha);
    let report = run_exp_moment(&ExpMomentConfig {
        n_grid: vec![8, 12, 16],
        alpha,
        beta,
        field: 0.0,
        dist: PatternDistribution::Bernoulli,
        c: a / 2.0,
        engine: Engine::default(),
        ensemble: EnsembleConfig::new(SEED, 100, workers()),
    })
    .unwrap();
    let values: Vec<String> = report.rows.iter().map(|r| format!("N={}: {:.4}", r.n, r.value.mean)).collect();
    check(
        report.max_over_min() <= 1.5,
        format!("c = {}, [{}], max/min {:.4}", a / 2.0, values.join(", "), report.max_over_min()),
    )
}

fn concentration() -> Outcome {
    let fit = run_concentration(&ConcentrationConfig {
        n_grid: vec![8, 12, 16],
        alpha: 16.0,
        beta: 0.5,
        field: 0.0,
        dist: PatternDistribution::Bernoulli,
        d: 2.0,
        engine: Engine::default(),
        ensemble: EnsembleConfig::new(SEED, 500, workers()),
    })
    .unwrap();
    let Some(line) = fit.fit else {
        return Err("a centred moment vanished; no slope".into());
    };
    let moments: Vec<String> = fit.rows.iter().map(|r| format!("N={}: {:.3e}", r.n, r.moment.mean)).collect();
    check(
        (line.slope + 1.0).abs() <= 0.4,
        format!("[{}], slope {:.3} +- {:.3}", moments.join(", "), line.slope, line.slope_se),
    )
}

fn stein_identity() -> Outcome {
    let c = run_stein_check(&SteinConfig {
        params: params(10, 20, 1.0, 0.0, PatternDistribution::Gaussian),
        t: 0.5,
        coupling_dist: PatternDistribution::Gaussian,
        engine: Engine::default(),
        ensemble: EnsembleConfig::new(SEED, 2000, workers()),
    })
    .unwrap();
    let gap = (c.lhs.mean - c.rhs.mean).abs();
    let tol = 3.0 * c.combined_std_error();
    check(
        gap <= tol,
        format!("lhs {:.5}, rhs {:.5}, |lhs - rhs| {gap:.5} <= {tol:.5}", c.lhs.mean, c.rhs.mean),
    )
}

fn mc_validity() -> Outcome {
    let settings = McSettings::default();
    let dist = PatternDistribution::Bernoulli;

    // thermodynamic integration at N = 14
    let (n, m, beta) = (14, 28, 0.5);
    let d = instance(SEED, 50, dist, n, m);
    let p = params(n, m, beta, 0.0, dist);
    let exact = naive_free_energy(&d, &p, Hamiltonian::Hopfield);
    let ti = thermo_integration_free_energy(
        &d,
        &p,
        Hamiltonian::Hopfield,
        &settings.tempering(beta).unwrap(),
        DisorderSeed::new(SEED, 50, StreamRole::McChain(0)),
    )
    .unwrap()
    .estimate;
    let ti_gap = (ti.mean - exact).abs();
    let ti_ok = ti_gap <= 3.0 * ti.std_error && ti_gap <= 5e-3;

    // Metropolis histogram at N = 8
    let (n, m, beta) = (8, 16, 0.5);
    let d = instance(SEED, 51, dist, n, m);
    let p = params(n, m, beta, 0.0, dist);
    let w = gibbs_weights(&d, &p, Hamiltonian::Hopfield);
    let z: f64 = w.iter().sum();
    let sampler = Sampler::new(&d, &p, Hamiltonian::Hopfield, CacheBackend::Auto).unwrap();
    let mut chain = sampler.new_chain(DisorderSeed::new(SEED, 51, StreamRole::McChain(0))).unwrap();
    for _ in 0..1000 {
        sampler.metropolis_sweep(&mut chain, beta);
    }
    let sweeps = 1_000_000;
    let mut counts = vec![0u64; 1 << n];
    for _ in 0..sweeps {
        sampler.metropolis_sweep(&mut chain, beta);
        counts[chain.config().as_bits().unwrap() as usize] += 1;
    }
    let tv = 0.5
        * counts
            .iter()
            .zip(&w)
            .map(|(&c, &wx)| (c as f64 / sweeps as f64 - wx / z).abs())
            .sum::<f64>();
    let tv_ok = tv <= 0.01;

    // coverage of 3-sigma error bars over independent runs at N = 10
    let (n, m, beta) = (10, 20, 0.5);
    let d = instance(SEED, 52, dist, n, m);
    let p = params(n, m, beta, 0.0, dist);
    let exact10 = naive_free_energy(&d, &p, Hamiltonian::Hopfield);
    let runs = 200;
    let cfg = settings.tempering(beta).unwrap();
    let z_scores = disorder_map(runs, workers(), |r| {
        let seed = DisorderSeed::new(SEED, 1000 + r as u64, StreamRole::McChain(0));
        let e = thermo_integration_free_energy(&d, &p, Hamiltonian::Hopfield, &cfg, seed)?.estimate;
        Ok((e.mean - exact10).abs() / e.std_error)
    })
    .unwrap();
    let covered = z_scores.iter().filter(|&&z| z <= 3.0).count();
    let coverage = covered as f64 / runs as f64;
    let cov_ok = coverage >= 0.97;

    check(
        ti_ok && tv_ok && cov_ok,
        format!(
            "TI at N=14: {:.6} +- {:.6} vs exact {exact:.6} (gap {ti_gap:.2e}); histogram TV {tv:.4}; 3-sigma coverage {covered}/{runs}",
            ti.mean, ti.std_error
        ),
    )
}

fn csv_bytes(args: &str, out: &Path) -> Vec<(String, Vec<u8>)> {
    let argv: Vec<String> = std::iter::once("spinglass".to_string())
        .chain(args.split_whitespace().map(String::from))
        .chain(["--out".to_string(), out.display().to_string()])
        .collect();
    let outcome = execute(&parse_cli(argv).unwrap()).unwrap();
    let mut files: Vec<(String, Vec<u8>)> = outcome
        .outputs
        .iter()
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "exact --n 10 --m 20 --beta 0.7 --field 0.2 --seed 42",
        "mc --n 10 --m 20 --beta 0.7 --sweeps 2000 --seed 42",
        "theorem1 --n 10 --alphas 1,2,4 --realizations 12 --beta 0.5 --seed 42",
        "figure1 --n 8 --alphas 1,2 --panels 1:0 --realizations 4 --sk-realizations 4 --engine mc --sweeps 640 --ladder-nodes 9 --seed 42",
        "overlap-tail --n 10 --m 160 --beta 0.5 --realizations 10 --r-max 5 --fit-lo 1 --fit-hi 4 --seed 42",
        "exp-moment --n-grid 6,8 --alpha 16 --beta 0.5 --realizations 10 --seed 42",
        "concentration --n-grid 6,8,10 --alpha 4 --beta 0.5 --realizations 20 --seed 42",
        "interpolate --n 8 --m 16 --beta 0.8 --realizations 6 --seed 42",
        "stein-check --n 8 --m 16 --realizations 20 --seed 42",
    ];
    let mut compared = 0;
    for (k, case) in cases.iter().enumerate() {
        let a = csv_bytes(&format!("{case} --workers 1"), &dir.path().join(format!("{k}-1")));
        let b = csv_bytes(&format!("{case} --workers 8"), &dir.path().join(format!("{k}-8")));
        if a.is_empty() || a != b {
            return Err(format!("'{case}' differs between 1 and 8 workers"));
        }
        compared += a.len();
    }
    check(true, format!("{compared} CSV files from {} runs identical at 1 and 8 workers", cases.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        (1, "exact enumeration matches naive summation", oracle_equivalence),
        (2, "closed forms at beta = 0 and N = 1", closed_forms),
        (3, "derivative identities", derivative_identities),
        (4, "interpolation endpoints", interpolation_endpoints),
        (5, "residual decay in alpha", residual_decay),
        (6, "high-temperature expansion", high_temperature),
        (7, "free-energy curve shape at N = 20", figure_shape),
        (8, "overlap tail rate", overlap_tail),
        (9, "exponential moment uniformity", exp_moment_uniformity),
        (10, "concentration slope", concentration),
        (11, "Stein term identity", stein_identity),
        (12, "Monte Carlo validity", mc_validity),
        (13, "determinism across worker counts", determinism),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (mut ran, mut failures) = (0, 0);
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name} ({secs:.1} s): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {id:>2} {name} ({secs:.1} s): {detail}");
            }
        }
    }
    println!("{} of {ran} criteria passed", ran - failures);
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failures == 0 || !strict {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
