mod common;

use common::{
    binomial_walk_exp_moment, binomial_walk_tail, instance, naive_expectation, naive_free_energy, params, spins,
};
use spinglass::exact::{
    exact_diffrule_check, exact_expectations, exact_interpolation_derivative, exact_log_partition,
    exact_overlap_statistics, DiffruleObservable, ExactOptions, LseMode,
};
use spinglass::model::{energy, Disorder, Hamiltonian, SpinConfiguration};
use spinglass::observable::Observable;
use spinglass::patterns::PatternDistribution;
use spinglass::Error;

const FAMILIES: [PatternDistribution; 3] = [
    PatternDistribution::Bernoulli,
    PatternDistribution::Gaussian,
    PatternDistribution::HeavyTail { dof: 12.0 },
];

fn hamiltonians() -> [Hamiltonian; 5] {
    [
        Hamiltonian::Hopfield,
        Hamiltonian::LeaveOneOut,
        Hamiltonian::SK,
        Hamiltonian::SK_SQRT2,
        Hamiltonian::Interpolated { t: 0.3 },
    ]
}

#[test]
fn enumeration_matches_plain_summation() {
    let opts = ExactOptions::default();
    for (s, dist) in FAMILIES.into_iter().enumerate() {
        let d = instance(11, s as u64, dist, 10, 20);
        let p = params(10, 20, 0.7, 0.3, dist);
        for which in hamiltonians() {
            let fast = exact_log_partition(&d, &p, which, &opts).unwrap().free_energy;
            let slow = naive_free_energy(&d, &p, which);
            assert!((fast - slow).abs() < 1e-10, "{dist} {which}: {fast} vs {slow}");
        }
    }
}

#[test]
fn two_pass_agrees_with_streaming() {
    let d = instance(3, 0, PatternDistribution::Gaussian, 12, 6);
    let p = params(12, 6, 3.0, -0.4, PatternDistribution::Gaussian);
    let two = ExactOptions {
        lse: LseMode::TwoPass,
        ..ExactOptions::default()
    };
    let obs = [Observable::spin_pair(0, 1), Observable::overlap_pow(2)];
    let a = exact_expectations(&d, &p, Hamiltonian::Hopfield, &obs, &ExactOptions::default()).unwrap();
    let b = exact_expectations(&d, &p, Hamiltonian::Hopfield, &obs, &two).unwrap();
    assert!((a.result.log_z - b.result.log_z).abs() < 1e-12);
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn gibbs_averages_match_plain_summation() {
    let d = instance(5, 2, PatternDistribution::Bernoulli, 9, 18);
    let p = params(9, 18, 1.2, 0.2, PatternDistribution::Bernoulli);
    let obs = [
        Observable::spin_pair(0, 1),
        Observable::overlap_pow(2),
        Observable::Magnetization,
    ];
    let got = exact_expectations(&d, &p, Hamiltonian::Hopfield, &obs, &ExactOptions::default()).unwrap();
    let want = [
        naive_expectation(&d, &p, Hamiltonian::Hopfield, |x, _| x[0] * x[1]),
        naive_expectation(&d, &p, Hamiltonian::Hopfield, |_, s| s * s),
        naive_expectation(&d, &p, Hamiltonian::Hopfield, |x, _| x.iter().sum::<f64>() / x.len() as f64),
    ];
    for (g, w) in got.values.iter().zip(want) {
        assert!((g - w).abs() < 1e-10, "{g} vs {w}");
    }
}

#[test]
fn infinite_temperature_is_independent_spins() {
    for (s, dist) in FAMILIES.into_iter().enumerate() {
        let d = instance(7, s as u64, dist, 8, 24);
        for b in [0.0, 0.5, -1.5, 4.0] {
            let p = params(8, 24, 0.0, b, dist);
            for which in hamiltonians() {
                let f = exact_log_partition(&d, &p, which, &ExactOptions::default()).unwrap().free_energy;
                let want = (2.0 * b.cosh()).ln();
                assert!((f - want).abs() < 1e-12, "{which} B={b}: {f}");
            }
        }
    }
}

#[test]
fn single_spin_bernoulli_closed_form() {
    for m in [1, 4, 25] {
        let d = instance(9, m as u64, PatternDistribution::Bernoulli, 1, m);
        for (beta, b) in [(0.5, 0.0), (2.0, 1.0), (1.0, -3.0)] {
            let p = params(1, m, beta, b, PatternDistribution::Bernoulli);
            let f = exact_log_partition(&d, &p, Hamiltonian::Hopfield, &ExactOptions::default())
                .unwrap()
                .free_energy;
            let want = beta * (m as f64).sqrt() + (2.0 * b.cosh()).ln();
            assert!((f - want).abs() < 1e-12);
        }
    }
}

#[test]
fn free_energy_is_even_in_the_field_and_increasing_in_its_size() {
    let d = instance(2, 0, PatternDistribution::Gaussian, 10, 10);
    let f = |beta: f64, b: f64, which| {
        let p = params(10, 10, beta, b, PatternDistribution::Gaussian);
        exact_log_partition(&d, &p, which, &ExactOptions::default()).unwrap().free_energy
    };
    for which in [Hamiltonian::Hopfield, Hamiltonian::SK] {
        let mut last = f64::NEG_INFINITY;
        for k in 0..8 {
            let b = 0.25 * k as f64;
            let (up, down) = (f(0.9, b, which), f(0.9, -b, which));
            assert!((up - down).abs() < 1e-12);
            assert!(up >= last - 1e-14);
            last = up;
        }
    }
}

#[test]
fn log_partition_is_convex_in_beta() {
    let d = instance(4, 1, PatternDistribution::Bernoulli, 10, 30);
    let grid: Vec<f64> = (0..=20).map(|k| 0.15 * k as f64).collect();
    let f: Vec<f64> = grid
        .iter()
        .map(|&beta| {
            let p = params(10, 30, beta, 0.1, PatternDistribution::Bernoulli);
            exact_log_partition(&d, &p, Hamiltonian::Hopfield, &ExactOptions::default())
                .unwrap()
                .free_energy
        })
        .collect();
    for w in f.windows(3) {
        assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-12);
    }
}

#[test]
fn infinite_temperature_overlap_law_is_binomial() {
    let n = 14;
    let d = instance(6, 0, PatternDistribution::Bernoulli, n, 28);
    let p = params(n, 28, 0.0, 0.0, PatternDistribution::Bernoulli);
    let c = 0.2;
    let st = exact_overlap_statistics(&d, &p, Hamiltonian::Hopfield, c, 6, &ExactOptions::default()).unwrap();
    for (r, tail) in st.tail.iter().enumerate() {
        let want = binomial_walk_tail(n, ((r * n) as f64).sqrt());
        assert!((tail - want).abs() < 1e-12, "r = {r}: {tail} vs {want}");
    }
    assert!((st.exp_moment - binomial_walk_exp_moment(n, c)).abs() < 1e-12);
    // second moment of the normalised walk is exactly 1
    assert!((st.moments[1] - 1.0).abs() < 1e-12);
}

#[test]
fn leave_one_out_energy_identity() {
    let (n, m) = (11, 33);
    let d = instance(8, 0, PatternDistribution::Gaussian, n, m);
    let p = params(n, m, 1.0, 0.0, PatternDistribution::Gaussian);
    for bits in [0u64, 5, 1234, 2047, 777] {
        let x = SpinConfiguration::from_bits(bits, n);
        let h = energy(&x, &d, Hamiltonian::Hopfield, &p).unwrap();
        let h_star = energy(&x, &d, Hamiltonian::LeaveOneOut, &p).unwrap();
        let s = common::overlap(&spins(bits, n), &d);
        assert!((h_star - (h + s * s / p.alpha().sqrt())).abs() < 1e-12);
    }
}

#[test]
fn interpolation_endpoints_hold_per_realization() {
    let opts = ExactOptions::default();
    for r in 0..5 {
        let d = instance(10, r, PatternDistribution::Gaussian, 10, 40);
        let p = params(10, 40, 0.8, 0.4, PatternDistribution::Gaussian);
        let f = |which| exact_log_partition(&d, &p, which, &opts).unwrap().free_energy;
        let f0 = f(Hamiltonian::Interpolated { t: 0.0 });
        let f1 = f(Hamiltonian::Interpolated { t: 1.0 });
        assert!((f0 - f(Hamiltonian::SK_SQRT2)).abs() < 1e-12);
        assert!((f1 - (f(Hamiltonian::Hopfield) - p.beta * p.alpha().sqrt())).abs() < 1e-12);
    }
}

#[test]
fn interpolation_derivative_matches_finite_differences() {
    let d = instance(12, 0, PatternDistribution::Gaussian, 8, 16);
    let p = params(8, 16, 0.9, 0.2, PatternDistribution::Gaussian);
    for t in [0.1, 0.5, 0.9] {
        let c = exact_interpolation_derivative(&d, &p, t, 1e-5, &ExactOptions::default()).unwrap();
        assert!(c.discrepancy() < 1e-6, "t = {t}: {c:?}");
    }
}

#[test]
fn finite_difference_error_is_second_order() {
    let d = instance(12, 1, PatternDistribution::Bernoulli, 8, 16);
    let p = params(8, 16, 1.0, 0.0, PatternDistribution::Bernoulli);
    let err = |h: f64| {
        exact_interpolation_derivative(&d, &p, 0.5, h, &ExactOptions::default())
            .unwrap()
            .discrepancy()
    };
    let (e1, e2, e3) = (err(0.02), err(0.01), err(0.005));
    for ratio in [e1 / e2, e2 / e3] {
        assert!((3.5..4.5).contains(&ratio), "halving ratio {ratio}");
    }
}

/// d<g>/d xi^1_i by a central difference of plain-summation averages.
fn oracle_pattern_derivative(d: &Disorder, p: &spinglass::model::ModelParams, t: f64, site: usize, g: DiffruleObservable) -> f64 {
    let which = if t == 1.0 { Hamiltonian::Hopfield } else { Hamiltonian::Interpolated { t } };
    let xi = d.patterns.as_ref().unwrap();
    let h = 1e-4;
    let at = |v: f64| {
        let dd = Disorder {
            patterns: Some(xi.with_entry(0, site, v)),
            couplings: d.couplings.clone(),
        };
        // the overlap uses the perturbed pattern as well
        naive_expectation(&dd, p, which, |x, s| match g {
            DiffruleObservable::SpinPair => x[0] * x[1],
            DiffruleObservable::SiteOverlap => x[site] * s,
        })
    };
    let base = xi.get(0, site);
    (at(base + h) - at(base - h)) / (2.0 * h)
}

#[test]
fn pattern_derivative_rule() {
    let d = instance(13, 0, PatternDistribution::Gaussian, 8, 16);
    let p = params(8, 16, 0.7, 0.1, PatternDistribution::Gaussian);
    for t in [1.0, 0.5] {
        for g in [DiffruleObservable::SpinPair, DiffruleObservable::SiteOverlap] {
            for site in [0, 3] {
                let c = exact_diffrule_check(&d, &p, t, site, g, 1e-4, &ExactOptions::default()).unwrap();
                assert!(c.discrepancy() < 1e-6, "{g:?} t={t} site={site}: {c:?}");
                let oracle = oracle_pattern_derivative(&d, &p, t, site, g);
                assert!((c.analytic - oracle).abs() < 1e-6, "{} vs {oracle}", c.analytic);
            }
        }
    }
}

#[test]
fn enumeration_refuses_sizes_above_the_cap() {
    let d = instance(1, 0, PatternDistribution::Bernoulli, 27, 1);
    let p = params(27, 1, 1.0, 0.0, PatternDistribution::Bernoulli);
    let err = exact_log_partition(&d, &p, Hamiltonian::Hopfield, &ExactOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Capacity { n: 27, cap: 26 }));
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn large_exponents_do_not_overflow() {
    let d = instance(14, 0, PatternDistribution::Bernoulli, 12, 12);
    let p = params(12, 12, 400.0, 0.0, PatternDistribution::Bernoulli);
    let r = exact_log_partition(&d, &p, Hamiltonian::Hopfield, &ExactOptions::default()).unwrap();
    assert!(r.log_z.is_finite());
    assert!(r.log_z >= r.max_exponent && r.log_z <= r.max_exponent + (4096f64).ln());
}
