//! Partial measurement limit: bath self-Hamiltonians kept, central oscillator
//! frequency dropped (`Ω = 0`).
//!
//! Every oscillator contributes an exactly periodic term
//!
//! ```text
//! ln|Γ|(t) = (ΔX²/2) Σ coth(ħω_k/2k_BT) C_k² (cos ω_k t - 1) / (m_k ω_k³ ħ)
//! ```
//!
//! (`tanh` for `B`). The infinite-time average factorises into
//! `Π e^{-a_k} I0(a_k)` with `a_k = ΔX² C_k² w_k / (2 m_k ω_k³ ħ)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::bath::{derive_seed, sample_frequencies, thermal_weight};
use crate::specfun::ln_scaled_i0;
use crate::sum::{compensated_sum, NeumaierSum};
use crate::{BathSpec, EnvInitState, Error, Factor, Result, Scenario, SystemSpec, UnitContext};

/// Default lower bound on the large-separation ratio.
pub const LARGE_SEPARATION_THRESHOLD: f64 = 10.0;

/// Displacement amplitude and phase coefficient of one oscillator.
///
/// `alpha` is in units of 1/m (it multiplies `X`) and `zeta` in 1/m²
/// (it multiplies `X²`). The phase never enters `|Γ|` or `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PqmlPropagator {
    pub alpha: Complex64,
    pub zeta: f64,
}

/// `α(t) = -(C/√(2mω³ħ)) (e^{iωt} - 1)`, `ζ(t) = C²/(mω³ħ) (ωt - sin ωt)`.
pub fn pqml_propagator(t: f64, omega: f64, m: f64, c: f64, units: &UnitContext) -> Result<PqmlPropagator> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", "must be non-negative and finite"));
    }
    let strength = c * c / (m * omega.powi(3) * units.hbar);
    let phase = omega * t;
    let half = (0.5 * phase).sin();
    // e^{iφ} - 1 = (-2 sin²(φ/2), sin φ)
    let shift = Complex64::new(-2.0 * half * half, phase.sin());
    Ok(PqmlPropagator {
        alpha: -shift * (0.5 * strength).sqrt(),
        zeta: strength * (phase - phase.sin()),
    })
}

/// `C_k² / (m_k ω_k³ ħ)` for oscillator `k`.
#[inline]
pub(crate) fn strength(bath: &BathSpec, k: usize, units: &UnitContext) -> f64 {
    let c = bath.couplings()[k];
    c * c / (bath.masses()[k] * bath.omegas()[k].powi(3) * units.hbar)
}

fn check(s: &Scenario<'_>, idx: &[usize]) -> Result<()> {
    s.validate(idx)?;
    if s.env.squeezing != 0.0 {
        return Err(Error::UnsupportedSqueezing);
    }
    Ok(())
}

/// Per-oscillator pieces of the log factor: `ln f(t) = -Σ amp_k sin²(ω_k t/2)`.
#[derive(Debug, Clone)]
pub(crate) struct PqmlTerms {
    omegas: Vec<f64>,
    amps: Vec<f64>,
}

impl PqmlTerms {
    pub(crate) fn new(s: &Scenario<'_>, idx: &[usize], factor: Factor) -> Result<Self> {
        check(s, idx)?;
        let dx2 = s.system.separation_sq();
        let amps = idx
            .iter()
            .map(|&k| {
                let w = s.units.thermal_weight(factor, s.bath.omegas()[k], s.env.temperature);
                dx2 * w * strength(s.bath, k, &s.units)
            })
            .collect();
        Ok(PqmlTerms {
            omegas: idx.iter().map(|&k| s.bath.omegas()[k]).collect(),
            amps,
        })
    }

    #[inline]
    pub(crate) fn ln_factor(&self, t: f64) -> f64 {
        let mut acc = NeumaierSum::new();
        for (&w, &a) in self.omegas.iter().zip(&self.amps) {
            let s = (0.5 * w * t).sin();
            acc.add(-a * s * s);
        }
        acc.value()
    }
}

fn ln_factor(t: f64, s: &Scenario<'_>, idx: &[usize], factor: Factor) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", "must be non-negative and finite"));
    }
    Ok(PqmlTerms::new(s, idx, factor)?.ln_factor(t))
}

pub fn ln_gamma_pqml(t: f64, s: &Scenario<'_>, idx: &[usize]) -> Result<f64> {
    ln_factor(t, s, idx, Factor::Decoherence)
}

/// `|Γ(t)|` over the traced-out set `idx`. `s.system.omega` is ignored.
pub fn gamma_pqml(t: f64, s: &Scenario<'_>, idx: &[usize]) -> Result<f64> {
    ln_gamma_pqml(t, s, idx).map(f64::exp)
}

pub fn ln_b_pqml(t: f64, s: &Scenario<'_>, idx: &[usize]) -> Result<f64> {
    ln_factor(t, s, idx, Factor::Distinguishability)
}

/// `B(t)` over the macrofraction `idx`.
pub fn b_pqml(t: f64, s: &Scenario<'_>, idx: &[usize]) -> Result<f64> {
    ln_b_pqml(t, s, idx).map(f64::exp)
}

/// I0 arguments of one oscillator. The baseline exponent `e^{-a}` uses the
/// same number as the Bessel argument.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OscillatorTerm {
    pub index: usize,
    /// `a_k` with the `coth` weight.
    pub decoherence_arg: f64,
    /// `a_k` with the `tanh` weight.
    pub distinguishability_arg: f64,
}

/// Infinite-time averages over one index set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AvgResult {
    /// `ln ⟨|Γ|⟩` if the set is traced out.
    pub log_avg_gamma: f64,
    /// `ln ⟨B⟩` if the set is observed.
    pub log_avg_b: f64,
    pub terms: Vec<OscillatorTerm>,
    /// Two oscillators share a frequency; the time average then need not
    /// equal the phase average.
    pub duplicate_frequencies: bool,
}

impl AvgResult {
    pub fn avg_gamma(&self) -> f64 {
        self.log_avg_gamma.exp()
    }

    pub fn avg_b(&self) -> f64 {
        self.log_avg_b.exp()
    }

    pub fn log_avg(&self, factor: Factor) -> f64 {
        match factor {
            Factor::Decoherence => self.log_avg_gamma,
            Factor::Distinguishability => self.log_avg_b,
        }
    }
}

/// Analytic infinite-time averages `Π e^{-a_k} I0(a_k)` over `idx`, for both
/// thermal weights.
pub fn avg_analytic(s: &Scenario<'_>, idx: &[usize]) -> Result<AvgResult> {
    check(s, idx)?;
    let half_dx2 = 0.5 * s.system.separation_sq();
    let mut terms = Vec::with_capacity(idx.len());
    let (mut lg, mut lb) = (NeumaierSum::new(), NeumaierSum::new());
    for &k in idx {
        let x = s.units.thermal_arg(s.bath.omegas()[k], s.env.temperature);
        let base = half_dx2 * strength(s.bath, k, &s.units);
        let term = OscillatorTerm {
            index: k,
            decoherence_arg: base * thermal_weight(Factor::Decoherence, x),
            distinguishability_arg: base * thermal_weight(Factor::Distinguishability, x),
        };
        lg.add(ln_scaled_i0(term.decoherence_arg)?);
        lb.add(ln_scaled_i0(term.distinguishability_arg)?);
        terms.push(term);
    }
    let mut freqs: Vec<f64> = idx.iter().map(|&k| s.bath.omegas()[k]).collect();
    freqs.sort_by(f64::total_cmp);
    let duplicate_frequencies = freqs.windows(2).any(|w| w[0] == w[1]);
    Ok(AvgResult {
        log_avg_gamma: lg.value(),
        log_avg_b: lb.value(),
        terms,
        duplicate_frequencies,
    })
}

/// `√(M γ̃₀ / ħ) |X - X'| / ω^{3/2}`; its square over `2π` is the I0 argument
/// of a zero-temperature oscillator with couplings `√(M m γ̃₀ / π)`.
pub fn check_large_separation(system: &SystemSpec, omega: f64, gamma0: f64, units: &UnitContext) -> f64 {
    (system.mass * gamma0 / units.hbar).sqrt() * system.separation() / omega.powf(1.5)
}

/// `γ̃₀` implied by mass-proportional couplings `C_k = √(M m_k γ̃₀ / π)`.
fn implied_gamma0(s: &Scenario<'_>, idx: &[usize]) -> Result<f64> {
    let gamma = |k: usize| PI * s.bath.couplings()[k].powi(2) / (s.system.mass * s.bath.masses()[k]);
    let g0 = gamma(idx[0]);
    if idx.iter().any(|&k| (gamma(k) / g0 - 1.0).abs() > 1e-9) {
        return Err(Error::invalid("couplings", "must be proportional to sqrt(m_k)"));
    }
    Ok(g0)
}

/// Large-separation, zero-temperature log average
/// `Σ_k [(3/2) ln ω_k - ln(√(Mγ̃₀/ħ) |X-X'|)]`, valid for both factors.
pub fn avg_asymptotic(s: &Scenario<'_>, idx: &[usize], threshold: f64) -> Result<f64> {
    check(s, idx)?;
    if idx.is_empty() {
        return Ok(0.0);
    }
    let gamma0 = implied_gamma0(s, idx)?;
    let mut acc = NeumaierSum::new();
    for &k in idx {
        let ratio = check_large_separation(&s.system, s.bath.omegas()[k], gamma0, &s.units);
        if !(ratio >= threshold) {
            return Err(Error::LargeSeparation {
                index: k,
                ratio,
                threshold,
            });
        }
        acc.add(-ratio.ln());
    }
    Ok(acc.value())
}

/// Monte Carlo frequency average of the large-separation result against its
/// closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrequencyAverage {
    /// `ln` of the sample mean of `⟨|Γ|⟩`.
    pub empirical_log_mean: f64,
    /// Sample mean of `ln ⟨|Γ|⟩`.
    pub mean_log: f64,
    /// `-mN ln(√(Mγ̃₀/ħ) |X-X'| / ω̄^{3/2})`.
    pub predicted_log: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyBand {
    pub omega_bar: f64,
    pub delta: f64,
}

/// Average of [`avg_asymptotic`] over `mc_samples` i.i.d. uniform draws of
/// `mn` frequencies, with unit-prefactor couplings built from `gamma0`.
/// Sample `i` is drawn from a seed derived from `(seed, i)`.
#[allow(clippy::too_many_arguments)]
pub fn freq_averaged_scaling(
    system: &SystemSpec,
    env: &EnvInitState,
    band: FrequencyBand,
    mn: usize,
    gamma0: f64,
    mc_samples: usize,
    seed: u64,
    units: &UnitContext,
) -> Result<FrequencyAverage> {
    let FrequencyBand { omega_bar, delta } = band;
    if !(delta >= 0.0 && delta <= omega_bar / 5.0) {
        return Err(Error::invalid("delta", "band must satisfy 0 <= delta <= omega_bar/5"));
    }
    if mc_samples == 0 {
        return Err(Error::invalid("mc_samples", "must be at least one"));
    }
    if !(gamma0 > 0.0) {
        return Err(Error::invalid("gamma0", "must be positive"));
    }
    env.validate()?;
    if env.squeezing != 0.0 {
        return Err(Error::UnsupportedSqueezing);
    }
    let top = omega_bar + 0.5 * delta;
    let worst = check_large_separation(system, top, gamma0, units);
    if !(worst >= LARGE_SEPARATION_THRESHOLD) {
        return Err(Error::LargeSeparation {
            index: 0,
            ratio: worst,
            threshold: LARGE_SEPARATION_THRESHOLD,
        });
    }
    let predicted_log = -(mn as f64) * check_large_separation(system, omega_bar, gamma0, units).ln();
    let coupling = (system.mass * gamma0 / PI).sqrt();
    let idx: Vec<usize> = (0..mn).collect();

    let mut logs = Vec::with_capacity(mc_samples);
    for i in 0..mc_samples {
        let omegas = sample_frequencies(mn, omega_bar, delta, derive_seed(seed, i as u64))?;
        let bath = BathSpec::new(omegas, alloc::vec![1.0; mn], alloc::vec![coupling; mn])?;
        let s = Scenario::new(&bath, *system, *env, *units);
        logs.push(avg_asymptotic(&s, &idx, LARGE_SEPARATION_THRESHOLD)?);
    }
    let n = mc_samples as f64;
    let mean_log = compensated_sum(logs.iter().copied()) / n;
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + compensated_sum(logs.iter().map(|&l| (l - max).exp())).ln();
    Ok(FrequencyAverage {
        empirical_log_mean: lse - n.ln(),
        mean_log,
        predicted_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_i0;
    use alloc::vec;

    const NAT: UnitContext = UnitContext::NATURAL;

    fn sys(dx: f64) -> SystemSpec {
        SystemSpec {
            mass: 1.0,
            omega: 0.0,
            x1: 0.0,
            x2: dx,
        }
    }

    #[test]
    fn propagator_values() {
        let (w, m, c) = (2.0, 1.5, 0.7);
        let p0 = pqml_propagator(0.0, w, m, c, &NAT).unwrap();
        assert_eq!(p0.alpha, Complex64::new(0.0, 0.0));
        assert_eq!(p0.zeta, 0.0);

        let s = c * c / (m * w * w * w);
        let half = pqml_propagator(PI / w, w, m, c, &NAT).unwrap();
        assert!((half.alpha.norm_sqr() / (2.0 * s) - 1.0).abs() < 1e-14);

        let full = pqml_propagator(2.0 * PI / w, w, m, c, &NAT).unwrap();
        assert!(full.alpha.norm() < 1e-15);
        assert!((full.zeta / (2.0 * PI * s) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_oscillator_values() {
        let bath = BathSpec::new(vec![3.0], vec![0.5], vec![1.2]).unwrap();
        let env = EnvInitState::thermal(0.8);
        let s = Scenario::new(&bath, sys(0.9), env, NAT);
        assert_eq!(gamma_pqml(0.0, &s, &[0]).unwrap(), 1.0);
        let revival = gamma_pqml(2.0 * PI / 3.0, &s, &[0]).unwrap();
        assert!((revival - 1.0).abs() < 1e-12);

        let cth = 1.0 / (3.0 / 1.6f64).tanh();
        let expected = (-0.81 * cth * 1.44 / (0.5 * 27.0)).exp();
        let g = gamma_pqml(PI / 3.0, &s, &[0]).unwrap();
        assert!((g / expected - 1.0).abs() < 1e-13);
        assert!(b_pqml(PI / 3.0, &s, &[0]).unwrap() >= g);
    }

    #[test]
    fn squeezing_rejected() {
        let bath = BathSpec::new(vec![3.0], vec![0.5], vec![1.2]).unwrap();
        let s = Scenario::new(&bath, sys(1.0), EnvInitState::squeezed(1.0, 0.1), NAT);
        assert_eq!(gamma_pqml(1.0, &s, &[0]), Err(Error::UnsupportedSqueezing));
    }

    #[test]
    fn analytic_average_trivial_cases() {
        let bath = BathSpec::new(vec![3.0, 4.0], vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let s = Scenario::new(&bath, sys(0.0), EnvInitState::thermal(1.0), NAT);
        let r = avg_analytic(&s, &[0, 1]).unwrap();
        assert_eq!(r.avg_gamma(), 1.0);
        assert_eq!(r.avg_b(), 1.0);
        assert!(!r.duplicate_frequencies);

        let dup = BathSpec::new(vec![3.0, 3.0], vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let s = Scenario::new(&dup, sys(1.0), EnvInitState::thermal(1.0), NAT);
        assert!(avg_analytic(&s, &[0, 1]).unwrap().duplicate_frequencies);
    }

    #[test]
    fn analytic_average_single_oscillator() {
        let bath = BathSpec::new(vec![2.0], vec![1.0], vec![3.0]).unwrap();
        let s = Scenario::new(&bath, sys(1.0), EnvInitState::thermal(1e-3), NAT);
        let r = avg_analytic(&s, &[0]).unwrap();
        let a = 0.5 * 9.0 / 8.0;
        assert!((r.terms[0].decoherence_arg - a).abs() < 1e-15);
        let expected = (-a).exp() * bessel_i0(a).unwrap().value;
        assert!((r.avg_gamma() / expected - 1.0).abs() < 1e-14);
    }

    #[test]
    fn asymptotic_scaling_examples() {
        let n = 5;
        let gamma0 = 1e6;
        let w = 2.0;
        let coupling = (gamma0 / PI).sqrt();
        let bath = BathSpec::new(vec![w; n], vec![1.0; n], vec![coupling; n]).unwrap();
        let env = EnvInitState::thermal(1e-6);
        let idx: Vec<usize> = (0..n).collect();

        let s = Scenario::new(&bath, sys(1.0), env, NAT);
        let got = avg_asymptotic(&s, &idx, 10.0).unwrap();
        let expected = -(n as f64) * (gamma0.sqrt() / w.powf(1.5)).ln();
        assert!((got - expected).abs() < 1e-12);

        let s10 = Scenario::new(&bath, sys(10.0), env, NAT);
        let one = avg_asymptotic(&s10, &[0], 10.0).unwrap() - avg_asymptotic(&s, &[0], 10.0).unwrap();
        assert!((one + 10f64.ln()).abs() < 1e-12);

        let s_small = Scenario::new(&bath, sys(1e-3), env, NAT);
        assert!(matches!(
            avg_asymptotic(&s_small, &idx, 10.0),
            Err(Error::LargeSeparation { index: 0, .. })
        ));

        let uneven = BathSpec::new(vec![w; 2], vec![1.0, 2.0], vec![coupling; 2]).unwrap();
        let s = Scenario::new(&uneven, sys(1.0), env, NAT);
        assert!(avg_asymptotic(&s, &[0, 1], 10.0).is_err());
    }

    #[test]
    fn large_separation_ratio() {
        let r1 = check_large_separation(&sys(1.0), 2.0, 3.0, &NAT);
        let r2 = check_large_separation(&sys(2.0), 2.0, 3.0, &NAT);
        assert!((r2 / r1 - 2.0).abs() < 1e-15);
        assert!(check_large_separation(&sys(1.0), 1e30, 3.0, &NAT) < 1e-40);
    }

    #[test]
    fn frequency_average_zero_band() {
        let system = sys(1.0);
        let band = FrequencyBand { omega_bar: 2.0, delta: 0.0 };
        let env = EnvInitState::thermal(1e-6);
        let r = freq_averaged_scaling(&system, &env, band, 7, 1e6, 5, 3, &NAT).unwrap();
        assert!((r.empirical_log_mean - r.predicted_log).abs() < 1e-12 * r.predicted_log.abs());
        assert!((r.mean_log - r.predicted_log).abs() < 1e-12 * r.predicted_log.abs());

        let r2 = freq_averaged_scaling(&system, &env, band, 14, 1e6, 5, 3, &NAT).unwrap();
        assert_eq!(r2.predicted_log, 2.0 * r.predicted_log);

        let wide = FrequencyBand { omega_bar: 2.0, delta: 1.0 };
        assert!(freq_averaged_scaling(&system, &env, wide, 7, 1e6, 5, 3, &NAT).is_err());
    }
}
