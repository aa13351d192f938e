mod common;

use common::{chi_square_z, gibbs_weights, instance, naive_expectation, params};
use spinglass::exact::{exact_expectations, exact_log_partition, ExactOptions};
use spinglass::mc::{
    disorder_average, mc_overlap_statistics, parallel_tempering_run, thermo_integration_free_energy, BurnIn,
    CacheBackend, Sampler, TemperingConfig,
};
use spinglass::model::Hamiltonian;
use spinglass::observable::Observable;
use spinglass::patterns::{DisorderSeed, PatternDistribution, StreamRole};

fn seed(stream: u64) -> DisorderSeed {
    DisorderSeed::new(2024, stream, StreamRole::McChain(0))
}

#[test]
fn single_node_ladder_is_plain_metropolis() {
    let d = instance(1, 0, PatternDistribution::Bernoulli, 10, 20);
    let p = params(10, 20, 0.8, 0.1, PatternDistribution::Bernoulli);
    let mut cfg = TemperingConfig::new(vec![0.8]);
    cfg.burn_in = BurnIn::Fixed(0);
    cfg.measurement_sweeps = 640;
    cfg.record_trace = true;
    let run = parallel_tempering_run(&cfg, &d, &p, Hamiltonian::Hopfield, &[], seed(4)).unwrap();

    let s = Sampler::new(&d, &p, Hamiltonian::Hopfield, CacheBackend::Auto).unwrap();
    let mut chain = s.new_chain(seed(4)).unwrap();
    let trace: Vec<f64> = (0..640)
        .map(|_| {
            s.metropolis_sweep(&mut chain, 0.8);
            chain.energy()
        })
        .collect();
    assert_eq!(run.energy_traces.unwrap()[0], trace);
    assert!(run.swap_acceptance.is_empty());
}

#[test]
fn identical_neighbouring_temperatures_always_swap() {
    let d = instance(2, 0, PatternDistribution::Gaussian, 8, 16);
    let p = params(8, 16, 0.6, 0.0, PatternDistribution::Gaussian);
    let mut cfg = TemperingConfig::new(vec![0.3, 0.6, 0.6]);
    cfg.burn_in = BurnIn::Fixed(10);
    cfg.measurement_sweeps = 320;
    let run = parallel_tempering_run(&cfg, &d, &p, Hamiltonian::Hopfield, &[], seed(0)).unwrap();
    assert_eq!(run.swap_acceptance[1], 1.0);
    assert!(run.audit <= 1e-7);
}

#[test]
fn tempering_overlap_square_matches_exact() {
    let d = instance(3, 0, PatternDistribution::Bernoulli, 12, 48);
    let p = params(12, 48, 1.0, 0.0, PatternDistribution::Bernoulli);
    let exact = exact_expectations(&d, &p, Hamiltonian::Hopfield, &[Observable::overlap_pow(2)], &Default::default())
        .unwrap()
        .values[0];
    let naive = naive_expectation(&d, &p, Hamiltonian::Hopfield, |_, s| s * s);
    assert!((exact - naive).abs() < 1e-10);
    let cfg = TemperingConfig::for_beta(1.0).unwrap();
    let run = parallel_tempering_run(&cfg, &d, &p, Hamiltonian::Hopfield, &[Observable::overlap_pow(2)], seed(1)).unwrap();
    let est = run.target()[0];
    assert!(est.covers(exact, 3.0), "PT {est} vs exact {exact}");
    assert!(run.audit <= 1e-7);
}

#[test]
fn energy_trace_mean_matches_exact() {
    let d = instance(4, 0, PatternDistribution::Gaussian, 10, 30);
    let p = params(10, 30, 0.7, 0.2, PatternDistribution::Gaussian);
    let exact = exact_expectations(&d, &p, Hamiltonian::Hopfield, &[Observable::Energy], &Default::default())
        .unwrap()
        .values[0];
    let mut cfg = TemperingConfig::new(vec![0.7]);
    cfg.measurement_sweeps = 64_000;
    let run = parallel_tempering_run(&cfg, &d, &p, Hamiltonian::Hopfield, &[Observable::Energy], seed(2)).unwrap();
    assert!(run.target()[0].covers(exact, 3.0), "{} vs {exact}", run.target()[0]);
}

#[test]
fn thermodynamic_integration_matches_enumeration() {
    let d = instance(5, 0, PatternDistribution::Bernoulli, 14, 28);
    let p = params(14, 28, 0.5, 0.0, PatternDistribution::Bernoulli);
    let exact = exact_log_partition(&d, &p, Hamiltonian::Hopfield, &ExactOptions::default()).unwrap().free_energy;
    let cfg = TemperingConfig::for_beta(0.5).unwrap();
    let ti = thermo_integration_free_energy(&d, &p, Hamiltonian::Hopfield, &cfg, seed(3)).unwrap();
    let est = ti.estimate;
    assert!(est.covers(exact, 3.0) && (est.mean - exact).abs() <= 5e-3, "TI {est} vs exact {exact}");
    assert!(ti.integrand.iter().all(|e| e.mean >= 0.0));
}

#[test]
fn thermodynamic_integration_at_zero_beta_is_exact() {
    let d = instance(6, 0, PatternDistribution::Bernoulli, 20, 20);
    let p = params(20, 20, 0.0, 0.4, PatternDistribution::Bernoulli);
    let cfg = TemperingConfig::for_beta(0.0).unwrap();
    let ti = thermo_integration_free_energy(&d, &p, Hamiltonian::Hopfield, &cfg, seed(0)).unwrap();
    assert_eq!(ti.estimate.mean, spinglass::stats::log_two_cosh(0.4));
    assert_eq!(ti.estimate.std_error, 0.0);
    assert!(!ti.estimate.degenerate);
}

#[test]
fn non_monotone_grid_is_a_domain_error() {
    let d = instance(6, 0, PatternDistribution::Bernoulli, 6, 6);
    let p = params(6, 6, 0.5, 0.0, PatternDistribution::Bernoulli);
    let cfg = TemperingConfig::new(vec![0.0, 0.4, 0.3, 0.45, 0.5]);
    let err = thermo_integration_free_energy(&d, &p, Hamiltonian::Hopfield, &cfg, seed(0)).unwrap_err();
    assert_eq!(err.exit_code(), 5);
}

#[test]
fn sampled_overlap_at_infinite_temperature() {
    let d = instance(7, 0, PatternDistribution::Bernoulli, 12, 12);
    let p = params(12, 12, 0.0, 0.0, PatternDistribution::Bernoulli);
    let mut cfg = TemperingConfig::new(vec![0.0]);
    cfg.measurement_sweeps = 32_000;
    let stats = mc_overlap_statistics(&d, &p, Hamiltonian::Hopfield, &cfg, seed(5), 0.1, 12).unwrap();
    assert!(stats.moments[1].covers(1.0, 3.0), "{}", stats.moments[1]);
    assert!(stats.tail.windows(2).all(|w| w[1].mean <= w[0].mean));
}

#[test]
fn disorder_averaged_sk_free_energy_matches_enumeration() {
    let (n, beta) = (14, 0.5);
    let p = params(n, 1, beta, 0.0, PatternDistribution::Gaussian);
    let realizations = 100;
    let exact = disorder_average(realizations, 1, |r| {
        let d = instance(8, r as u64, PatternDistribution::Gaussian, n, 1);
        Ok(exact_log_partition(&d, &p, Hamiltonian::SK_SQRT2, &Default::default())?.free_energy)
    })
    .unwrap();
    let mut cfg = TemperingConfig::new(spinglass::mc::default_ladder(beta, 9).unwrap());
    cfg.measurement_sweeps = 3200;
    cfg.burn_in = BurnIn::Fixed(500);
    let mc = disorder_average(realizations, 2, |r| {
        let d = instance(8, r as u64, PatternDistribution::Gaussian, n, 1);
        let s = DisorderSeed::new(8, r as u64, StreamRole::McChain(0));
        Ok(thermo_integration_free_energy(&d, &p, Hamiltonian::SK_SQRT2, &cfg, s)?.estimate.mean)
    })
    .unwrap();
    assert!(
        mc.estimate.covers(exact.estimate.mean, 3.0),
        "MC {} vs exact {}",
        mc.estimate,
        exact.estimate
    );
}

#[test]
fn worker_count_does_not_change_results() {
    let p = params(10, 20, 0.8, 0.0, PatternDistribution::Gaussian);
    let mut cfg = TemperingConfig::new(spinglass::mc::default_ladder(0.8, 9).unwrap());
    cfg.measurement_sweeps = 320;
    let run = |workers| {
        disorder_average(6, workers, |r| {
            let d = instance(9, r as u64, PatternDistribution::Gaussian, 10, 20);
            let s = DisorderSeed::new(9, r as u64, StreamRole::McChain(0));
            Ok(thermo_integration_free_energy(&d, &p, Hamiltonian::Hopfield, &cfg, s)?.estimate.mean)
        })
        .unwrap()
    };
    assert_eq!(run(1), run(8));
}

#[test]
fn single_site_updates_satisfy_detailed_balance() {
    let (n, m) = (6, 12);
    let d = instance(21, 0, PatternDistribution::Gaussian, n, m);
    let p = params(n, m, 0.8, 0.3, PatternDistribution::Gaussian);
    let w = gibbs_weights(&d, &p, Hamiltonian::Hopfield);
    let s = Sampler::new(&d, &p, Hamiltonian::Hopfield, CacheBackend::Overlap).unwrap();
    let mut chain = s.new_chain(seed(9)).unwrap();
    let states = 1usize << n;
    let mut visits = vec![0u64; states * n];
    let mut flips = vec![0u64; states * n];
    for step in 0..3_000_000usize {
        let i = step % n;
        let x = chain.config().as_bits().unwrap() as usize;
        visits[x * n + i] += 1;
        if s.metropolis_update(&mut chain, p.beta, i) {
            flips[x * n + i] += 1;
        }
    }

    // acceptance frequencies against min(1, w(x')/w(x))
    let (mut stat, mut dof) = (0.0, 0);
    for x in 0..states {
        for i in 0..n {
            let (c, a) = (visits[x * n + i] as f64, flips[x * n + i] as f64);
            let prob = (w[x ^ (1 << i)] / w[x]).min(1.0);
            if prob > 1.0 - 1e-9 {
                assert_eq!(a, c);
            } else if c >= 20.0 {
                stat += (a - c * prob).powi(2) / (c * prob * (1.0 - prob));
                dof += 1;
            }
        }
    }
    assert!(dof > 50);
    assert!(chi_square_z(stat, dof) < 4.0, "acceptance chi2 {stat} on {dof}");

    // flow x -> x^i equals flow x^i -> x
    let (mut stat, mut dof) = (0.0, 0);
    for x in 0..states {
        for i in 0..n {
            let y = x ^ (1 << i);
            if y < x {
                continue;
            }
            let (a, b) = (flips[x * n + i] as f64, flips[y * n + i] as f64);
            if a + b >= 20.0 {
                stat += (a - b).powi(2) / (a + b);
                dof += 1;
            }
        }
    }
    assert!(dof > 50);
    assert!(chi_square_z(stat, dof) < 4.0, "flow chi2 {stat} on {dof}");
}
