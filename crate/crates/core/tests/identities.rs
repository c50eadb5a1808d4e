//! Identities that tie the regimes and the analysis layer together.

use approx::assert_relative_eq;
use qbm_sbs::average::{default_samples, default_tau};
use qbm_sbs::bath::{derive_seed, make_partition, sample_frequencies, BathSampling, CouplingPrefactor};
use qbm_sbs::full::{self, time_average_numeric};
use qbm_sbs::pqml::{self, avg_analytic, freq_averaged_scaling, FrequencyBand};
use qbm_sbs::qml::QmlParams;
use qbm_sbs::sbs::{formation_time, macrofraction_scaling, FactorModel, PqmlModel, QmlModel, ScalingModel};
use qbm_sbs::scan::{scan_tr, Axis};
use qbm_sbs::{BathSpec, EnvInitState, Factor, Scenario, SystemSpec, UnitContext};

const SI: UnitContext = UnitContext::SI;

fn paper_bath(n: usize, seed: u64) -> BathSpec {
    BathSampling {
        n,
        omega_bar: 4.5e9,
        delta: 3e9,
        seed,
        mass: 1.0,
        gamma0: 0.33e18,
        prefactor: CouplingPrefactor::Two,
    }
    .build(1e-5)
    .unwrap()
}

fn system(omega: f64) -> SystemSpec {
    SystemSpec {
        mass: 1e-5,
        omega,
        x1: 0.0,
        x2: 1e-9,
    }
}

#[test]
fn static_full_model_is_the_partial_limit() {
    let bath = paper_bath(12, 3);
    let idx: Vec<usize> = (0..12).collect();
    let s = Scenario::new(&bath, system(0.0), EnvInitState::thermal(0.05), SI);
    for i in 0..400 {
        let t = i as f64 * 3.7e-11;
        let (g_full, g_pqml) = (full::gamma_full(t, &s, &idx).unwrap(), pqml::gamma_pqml(t, &s, &idx).unwrap());
        let (b_full, b_pqml) = (full::b_full(t, &s, &idx).unwrap(), pqml::b_pqml(t, &s, &idx).unwrap());
        assert_relative_eq!(g_full, g_pqml, max_relative = 1e-12);
        assert_relative_eq!(b_full, b_pqml, max_relative = 1e-12);
    }
}

#[test]
fn zero_temperature_makes_both_factors_equal() {
    let bath = paper_bath(6, 4);
    let idx: Vec<usize> = (0..6).collect();
    let s = Scenario::new(&bath, system(3e8), EnvInitState::squeezed(1e-5, 0.7), SI);
    for i in 0..100 {
        let t = i as f64 * 1.3e-10;
        assert_eq!(full::gamma_full(t, &s, &idx).unwrap(), full::b_full(t, &s, &idx).unwrap());
    }
}

#[test]
fn single_oscillator_average_matches_bessel_product() {
    let bath = paper_bath(1, 8);
    let s = Scenario::new(&bath, system(0.0), EnvInitState::thermal(0.02), SI);
    let (tau, n) = full::default_window(&bath, &s.system, &[0]);
    let exact = avg_analytic(&s, &[0]).unwrap();
    for (factor, target) in [(Factor::Decoherence, exact.avg_gamma()), (Factor::Distinguishability, exact.avg_b())] {
        let num = time_average_numeric(factor, &s, &[0], tau, n).unwrap();
        assert_relative_eq!(num.value, target, max_relative = 5e-3);
    }
}

#[test]
fn halving_the_samples_stays_within_the_indicator() {
    let bath = paper_bath(20, 1);
    let idx: Vec<usize> = (0..10).collect();
    for &(temp, r) in &[(0.01, 0.0), (0.1, 1.0), (0.01, 2.0)] {
        let s = Scenario::new(&bath, system(3e8), EnvInitState::squeezed(temp, r), SI);
        let (tau, n) = full::default_window(&bath, &s.system, &idx);
        for factor in [Factor::Decoherence, Factor::Distinguishability] {
            let fine = time_average_numeric(factor, &s, &idx, tau, n).unwrap();
            assert!(fine.value > 100.0 / n as f64, "T={temp} r={r}: unresolved");
            let coarse = time_average_numeric(factor, &s, &idx, tau, n / 2).unwrap();
            let change = (fine.value - coarse.value).abs();
            assert!(change < fine.indicator(), "T={temp} r={r}: {change:e} vs {:e}", fine.indicator());
        }
    }
}

#[test]
fn unresolved_averages_sit_on_the_sampling_floor() {
    // Hot, strongly squeezed: the factor collapses within one sample of t = 0,
    // so only the t = 0 sample survives. Estimate, halving change and
    // indicator are then all 1/n, and the halving check cannot hold strictly.
    let bath = paper_bath(20, 1);
    let idx: Vec<usize> = (0..10).collect();
    let s = Scenario::new(&bath, system(3e8), EnvInitState::squeezed(1.0, 3.0), SI);
    let (tau, n) = full::default_window(&bath, &s.system, &idx);
    let fine = time_average_numeric(Factor::Decoherence, &s, &idx, tau, n).unwrap();
    let coarse = time_average_numeric(Factor::Decoherence, &s, &idx, tau, n / 2).unwrap();
    let floor = 1.0 / n as f64;
    assert_relative_eq!(fine.value, floor, max_relative = 1e-3);
    assert_relative_eq!(coarse.value - fine.value, floor, max_relative = 1e-3);
    assert_relative_eq!(fine.indicator(), floor, max_relative = 1e-3);
}

#[test]
fn scan_rows_match_the_direct_average() {
    let bath = paper_bath(8, 2);
    let partition = make_partition(8, 4, &[4]).unwrap();
    let sys = system(3e8);
    let temps = Axis::Values { values: vec![0.02, 0.5] };
    let rs = Axis::Values { values: vec![0.0, 1.2] };
    let window = (2e-6, 20_000);
    let grid = scan_tr(&bath, &sys, &SI, &partition, &temps, &rs, Some(window)).unwrap();
    for (i, &temp) in grid.temperatures.iter().enumerate() {
        for (j, &r) in grid.squeezings.iter().enumerate() {
            let s = Scenario::new(&bath, sys, EnvInitState::squeezed(temp, r), SI);
            let g = time_average_numeric(Factor::Decoherence, &s, partition.unobserved(), window.0, window.1).unwrap();
            let b = time_average_numeric(Factor::Distinguishability, &s, &partition.macrofractions()[0], window.0, window.1)
                .unwrap();
            assert_eq!(grid.avg_gamma[i][j], g.value);
            assert_eq!(grid.avg_b[i][j], b.value);
        }
    }
}

#[test]
fn thermal_scan_distinguishability_rises_with_temperature() {
    let bath = paper_bath(20, 5);
    let partition = make_partition(20, 10, &[10]).unwrap();
    let temps = Axis::Range {
        min: 1e-3,
        max: 10.0,
        points: 9,
        log: true,
    };
    let rs = Axis::Values { values: vec![0.0] };
    let grid = scan_tr(&bath, &system(3e8), &SI, &partition, &temps, &rs, Some((1e-5, 100_000))).unwrap();
    let col: Vec<f64> = grid.avg_b.iter().map(|row| row[0]).collect();
    assert!(col.windows(2).all(|w| w[0] <= w[1]), "{col:?}");
}

#[test]
fn matched_sets_order_the_scan() {
    // Observed set is a copy of the traced-out set, so th <= cth orders the
    // averages at every grid point.
    let half = paper_bath(5, 6);
    let twice = |xs: &[f64]| xs.iter().chain(xs).copied().collect::<Vec<_>>();
    let bath = BathSpec::new(twice(half.omegas()), twice(half.masses()), twice(half.couplings())).unwrap();
    let partition = make_partition(10, 5, &[5]).unwrap();
    let temps = Axis::Values { values: vec![1e-3, 0.05, 1.0] };
    let rs = Axis::Values { values: vec![0.0, 0.5, 2.0] };
    let grid = scan_tr(&bath, &system(3e8), &SI, &partition, &temps, &rs, Some((1e-6, 10_000))).unwrap();
    for (gs, bs) in grid.avg_gamma.iter().zip(&grid.avg_b) {
        for (g, b) in gs.iter().zip(bs) {
            assert!(g <= b && *g > 0.0 && *b <= 1.0);
        }
    }
}

#[test]
fn larger_macrofractions_average_lower() {
    let bath = paper_bath(40, 7);
    let temps = Axis::Values { values: vec![0.01, 1.0] };
    let rs = Axis::Values { values: vec![0.0, 2.0] };
    let window = Some((2e-6, 20_000));
    let small = make_partition(40, 10, &[10]).unwrap();
    let large = make_partition(40, 10, &[30]).unwrap();
    let a = scan_tr(&bath, &system(3e8), &SI, &small, &temps, &rs, window).unwrap();
    let b = scan_tr(&bath, &system(3e8), &SI, &large, &temps, &rs, window).unwrap();
    for (x, y) in a.avg_b.iter().flatten().zip(b.avg_b.iter().flatten()) {
        assert!(y <= x, "{y} > {x}");
    }
}

#[test]
fn qml_formation_time_matches_inversion() {
    let couplings = sample_frequencies(30, 2e6, 1e6, 9).unwrap();
    let p = QmlParams::new(1e-9, 2.0, couplings, SI).unwrap();
    let (unobs, obs): (Vec<usize>, Vec<usize>) = ((0..15).collect(), (15..30).collect());
    let model = QmlModel::new(&p, &unobs, &obs).unwrap();
    let analytic = model.analytic_formation_time(0.01).unwrap();
    let steps = 2000;
    let t_max = 3.0 * analytic;
    let f = formation_time(&model, 0.01, t_max, steps).unwrap();
    let t = f.time.unwrap();
    assert!(t >= analytic && t - analytic <= t_max / steps as f64);
    assert_eq!(f.analytic, Some(analytic));
    assert_eq!(f.max_after_crossing.map(|m| m <= 0.01), Some(true));
}

#[test]
fn bounded_exponent_never_forms() {
    let bath = paper_bath(1, 10);
    let s = Scenario::new(&bath, system(0.0), EnvInitState::thermal(0.01), SI);
    let model = PqmlModel::new(&s, &[0], &[0]).unwrap();
    let period = 2.0 * std::f64::consts::PI / bath.omegas()[0];
    let f = formation_time(&model, 0.01, 20.0 * period, 4000).unwrap();
    assert_eq!(f.time, None);
}

#[test]
fn qml_scaling_is_linear_in_size() {
    // Identical couplings: every added oscillator contributes the same
    // exponent, so the slope is -(t/τ_B)² per oscillator.
    let c2: f64 = 4e12;
    let p = QmlParams::new(1e-9, 1.0, vec![c2.sqrt(); 64], SI).unwrap();
    let ts = qbm_sbs::qml::timescales(1e-9, 1.0, c2, &SI).unwrap().unwrap();
    let pool: Vec<usize> = (0..64).collect();
    let t = 0.3 * ts.tau_b;
    let fit = macrofraction_scaling(ScalingModel::QmlAt { params: &p, t }, Factor::Distinguishability, &pool, &[8, 16, 32, 64])
        .unwrap();
    assert!(fit.max_residual < 1e-10, "{fit:?}");
    assert_relative_eq!(fit.slope, -(t / ts.tau_b).powi(2), max_relative = 1e-10);
}

#[test]
fn averaged_scaling_slope_is_the_mean_log_factor() {
    let bath = paper_bath(200, 13);
    let pool: Vec<usize> = (0..200).collect();
    let s = Scenario::new(&bath, system(0.0), EnvInitState::thermal(0.01), SI);
    let fit = macrofraction_scaling(ScalingModel::PqmlAverage { scenario: s }, Factor::Distinguishability, &pool, &[50, 100, 150, 200])
        .unwrap();
    let per: Vec<f64> = avg_analytic(&s, &pool)
        .unwrap()
        .terms
        .iter()
        .map(|t| qbm_sbs::specfun::ln_scaled_i0(t.distinguishability_arg).unwrap())
        .collect();
    let mean = per.iter().sum::<f64>() / per.len() as f64;
    let sd = (per.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (per.len() - 1) as f64).sqrt();
    let se = sd / (50f64).sqrt();
    assert!((fit.slope - mean).abs() < 3.0 * se, "{} vs {mean} ± {se}", fit.slope);
}

#[test]
fn narrow_band_average_follows_the_prediction() {
    let sys = SystemSpec { x2: 1e-7, ..system(0.0) };
    let env = EnvInitState::thermal(1e-6);
    let band = FrequencyBand {
        omega_bar: 4.5e9,
        delta: 4.5e8,
    };
    for mn in [4usize, 16] {
        let f = freq_averaged_scaling(&sys, &env, band, mn, 0.33e18, 400, 21, &SI).unwrap();
        // ln ω^{3/2} averaged over the band differs from its value at ω̄ by
        // (3/4)(Δ/ω̄)²/12 per oscillator.
        let jensen = 0.75 * (0.1f64).powi(2) / 12.0 * mn as f64;
        assert!((f.mean_log - f.predicted_log).abs() < jensen + 0.02 * mn as f64 * 0.1, "{f:?}");
        assert!(f.empirical_log_mean >= f.mean_log);
    }
    let wide = FrequencyBand {
        omega_bar: 4.5e9,
        delta: 3e9,
    };
    assert!(freq_averaged_scaling(&sys, &env, wide, 4, 0.33e18, 10, 1, &SI).is_err());
}

#[test]
fn derived_seeds_give_independent_baths() {
    let a = sample_frequencies(50, 4.5e9, 3e9, derive_seed(1, 0)).unwrap();
    let b = sample_frequencies(50, 4.5e9, 3e9, derive_seed(1, 1)).unwrap();
    assert_ne!(a, b);
    assert_eq!(a, sample_frequencies(50, 4.5e9, 3e9, derive_seed(1, 0)).unwrap());
}

#[test]
fn default_window_resolves_fastest_frequency() {
    let bath = paper_bath(20, 1);
    let (tau, n) = full::default_window(&bath, &system(3e8), &[]);
    let (lo, hi) = bath.frequency_span(&[]);
    assert_eq!(tau, default_tau(lo));
    assert_eq!(n, default_samples(tau, 2.0 * (hi + 3e8)));
    assert!(tau / n as f64 <= 2.0 * std::f64::consts::PI / (2.0 * (hi + 3e8)) / 20.0 * (1.0 + 1e-12));
}
