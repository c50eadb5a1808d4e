//! Cross-regime identities that must hold for any correct build.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::average::{default_samples, default_tau, time_average};
use crate::bath::{couplings_from_masses, derive_seed, sample_frequencies, CouplingPrefactor};
use crate::full::{alpha_sq_full, alpha_sq_squeezed, re_alpha_sq_full};
use crate::pqml::{avg_analytic, pqml_propagator};
use crate::qml::{ln_gamma_qml, QmlParams};
use crate::sbs::{FactorModel, PqmlModel};
use crate::{BathSpec, EnvInitState, Result, Scenario, SystemSpec, UnitContext};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Check {
    pub name: &'static str,
    /// Largest deviation seen.
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &'static str, measured: f64, tolerance: f64) -> Self {
        Check {
            name,
            measured,
            tolerance,
            passed: measured <= tolerance,
        }
    }
}

/// Central-system parameters, band and coupling constant used by the checks.
pub const SYSTEM_MASS: f64 = 1e-5;
pub const SYSTEM_OMEGA: f64 = 3e8;
pub const SEPARATION: f64 = 1e-9;
pub const GAMMA0: f64 = 0.33e18;
pub const BAND: (f64, f64) = (4.5e9, 3e9);

fn system(omega: f64) -> SystemSpec {
    SystemSpec {
        mass: SYSTEM_MASS,
        omega,
        x1: 0.0,
        x2: SEPARATION,
    }
}

fn band_bath(n: usize, seed: u64) -> Result<BathSpec> {
    let omegas = sample_frequencies(n, BAND.0, BAND.1, seed)?;
    let masses = alloc::vec![1.0; n];
    let couplings = couplings_from_masses(&masses, SYSTEM_MASS, GAMMA0, CouplingPrefactor::Two)?;
    BathSpec::new(omegas, masses, couplings)
}

fn max_rel(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    pairs
        .map(|(a, b)| if b == 0.0 { a.abs() } else { ((a - b) / b).abs() })
        .fold(0.0, f64::max)
}

/// `|α|²` of the full model at `Ω = 0` against the partial-limit propagator.
pub fn static_limit(seed: u64) -> Result<Check> {
    let units = UnitContext::SI;
    let bath = band_bath(20, seed)?;
    let mut pairs = Vec::new();
    for k in 0..bath.len() {
        let (w, m, c) = (bath.omegas()[k], bath.masses()[k], bath.couplings()[k]);
        for i in 1..=1000 {
            let t = i as f64 * 1e-3 * 7.0 * 2.0 * PI / w;
            let full = alpha_sq_full(t, w, 0.0, m, c, &units)?;
            let partial = pqml_propagator(t, w, m, c, &units)?.alpha.norm_sqr();
            pairs.push((full, partial));
        }
    }
    Ok(Check::new("static central system limit", max_rel(pairs.into_iter()), 1e-10))
}

/// Squeezed amplitude at `r = 0` and `Re α²(0)`.
pub fn squeezing_reduction() -> Result<Check> {
    let units = UnitContext::SI;
    let bath = band_bath(5, 3)?;
    let mut worst: f64 = 0.0;
    for k in 0..bath.len() {
        let (w, m, c) = (bath.omegas()[k], bath.masses()[k], bath.couplings()[k]);
        worst = worst.max(re_alpha_sq_full(0.0, w, SYSTEM_OMEGA, m, c, &units)?.abs());
        for i in 0..200 {
            let t = i as f64 * 3.1e-11;
            let plain = alpha_sq_full(t, w, SYSTEM_OMEGA, m, c, &units)?;
            let sq = alpha_sq_squeezed(t, w, SYSTEM_OMEGA, m, c, 0.0, &units)?;
            worst = worst.max((plain - sq).abs());
        }
    }
    Ok(Check::new("unsqueezed reduction", worst, 0.0))
}

/// Numeric long-time averages of a three-oscillator partial-limit bath
/// against the Bessel-function product, at two temperatures.
pub fn ergodic_average(seed: u64) -> Result<Check> {
    let units = UnitContext::SI;
    let bath = band_bath(6, derive_seed(seed, 0))?;
    let (unobserved, observed) = ([0usize, 1, 2], [3usize, 4, 5]);
    let mut worst: f64 = 0.0;
    for &temperature in &[0.01, 0.1] {
        let s = Scenario::new(&bath, system(0.0), EnvInitState::thermal(temperature), units);
        let model = PqmlModel::new(&s, &unobserved, &observed)?;
        let (lo, hi) = bath.frequency_span(&[]);
        let tau = default_tau(lo);
        let n = default_samples(tau, hi);
        let g = time_average(|t| model.ln_factors(t).0.exp(), tau, n)?;
        let b = time_average(|t| model.ln_factors(t).1.exp(), tau, n)?;
        let ag = avg_analytic(&s, &unobserved)?.avg_gamma();
        let ab = avg_analytic(&s, &observed)?.avg_b();
        worst = worst.max(max_rel([(g.value, ag), (b.value, ab)].into_iter()));
    }
    Ok(Check::new("ergodic time average", worst, 5e-3))
}

/// `ln|Γ|` of the measurement limit at `2t` is four times its value at `t`.
pub fn qml_gaussian() -> Result<Check> {
    let p = QmlParams::new(SEPARATION, 1.3, alloc::vec![1.0e6, 2.0e6, 1.5e6], UnitContext::SI)?;
    let t = 1e-15;
    let a = ln_gamma_qml(t, &p, &[0, 1, 2])?;
    let b = ln_gamma_qml(2.0 * t, &p, &[0, 1, 2])?;
    Ok(Check::new("measurement limit gaussian decay", (b / a / 4.0 - 1.0).abs(), 1e-12))
}

pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    Ok(alloc::vec![
        static_limit(seed)?,
        squeezing_reduction()?,
        ergodic_average(seed)?,
        qml_gaussian()?,
    ])
}
