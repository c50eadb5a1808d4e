//! The full model, central oscillator frequency `Ω` included.
//!
//! With the central oscillator following `X cos Ωt`, each bath oscillator is a
//! driven oscillator with displacement per unit `X`
//!
//! ```text
//! α_k(t) = -(C_k / 2√(2 m_k ω_k ħ)) [ (e^{i(ω+Ω)t} - 1)/(ω+Ω) + (e^{i(ω-Ω)t} - 1)/(ω-Ω) ]
//! ```
//!
//! whose modulus squared is
//!
//! ```text
//! |α_k|² = C²ω / (2mħ(ω²-Ω²)²) [ (cos ωt - cos Ωt)² + (sin ωt - (Ω/ω) sin Ωt)² ].
//! ```
//!
//! A squeezed thermal bath state replaces `|α|²` by
//! `ch(2r) [|α|² - th(2r) Re α²] = (Re α)² e^{-2r} + (Im α)² e^{2r}`.
//! Amplitudes are in 1/m² (they multiply `(X - X')²`).

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::average::{self, Accumulator, TimeAverage};
use crate::sum::NeumaierSum;
use crate::{BathSpec, Error, Factor, Result, Scenario, SystemSpec, UnitContext};

/// Relative distance `|ω - Ω| / Ω` at or below which an oscillator is treated
/// as resonant.
pub const RESONANCE_GUARD: f64 = 1e-6;

fn check_resonance(index: usize, omega: f64, omega_big: f64) -> Result<()> {
    if (omega - omega_big).abs() <= RESONANCE_GUARD * omega_big {
        Err(Error::Resonance {
            index,
            omega,
            omega_big,
        })
    } else {
        Ok(())
    }
}

fn check_inputs(t: f64, omega: f64, omega_big: f64, m: f64, c: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", "must be non-negative and finite"));
    }
    if !(omega > 0.0 && m > 0.0 && c > 0.0) {
        return Err(Error::invalid("oscillator", "omega, mass and coupling must be positive"));
    }
    if !(omega_big >= 0.0) {
        return Err(Error::invalid("system.omega", "must be non-negative"));
    }
    check_resonance(0, omega, omega_big)
}

/// `e^{iθ} - 1` without cancellation near `θ = 0`.
#[inline]
fn unit_shift(theta: f64) -> Complex64 {
    let h = (0.5 * theta).sin();
    Complex64::new(-2.0 * h * h, theta.sin())
}

/// One bath oscillator prepared for repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DrivenOscillator {
    sum: f64,
    diff: f64,
    /// `C² / (8 m ω ħ)`.
    scale: f64,
}

impl DrivenOscillator {
    pub(crate) fn new(omega: f64, omega_big: f64, m: f64, c: f64, units: &UnitContext) -> Self {
        DrivenOscillator {
            sum: omega + omega_big,
            diff: omega - omega_big,
            scale: c * c / (8.0 * m * omega * units.hbar),
        }
    }

    pub(crate) fn from_bath(bath: &BathSpec, k: usize, system: &SystemSpec, units: &UnitContext) -> Result<Self> {
        let omega = bath.omegas()[k];
        check_resonance(k, omega, system.omega)?;
        Ok(Self::new(omega, system.omega, bath.masses()[k], bath.couplings()[k], units))
    }

    #[inline]
    fn bracket(&self, t: f64) -> Complex64 {
        unit_shift(self.sum * t) / self.sum + unit_shift(self.diff * t) / self.diff
    }

    /// `α(t)`.
    #[inline]
    pub(crate) fn alpha(&self, t: f64) -> Complex64 {
        -self.bracket(t) * self.scale.sqrt()
    }

    /// `((Re α)², (Im α)²)`.
    #[inline]
    pub(crate) fn components(&self, t: f64) -> (f64, f64) {
        let b = self.bracket(t);
        (self.scale * b.re * b.re, self.scale * b.im * b.im)
    }
}

/// Squeezed amplitude from the two quadrature parts.
#[inline]
pub(crate) fn squeeze(re_sq: f64, im_sq: f64, r: f64) -> f64 {
    if r == 0.0 {
        re_sq + im_sq
    } else {
        let g = (2.0 * r).exp();
        re_sq / g + im_sq * g
    }
}

/// Complex displacement `α(t)` per unit central-system position.
pub fn alpha_full(t: f64, omega: f64, omega_big: f64, m: f64, c: f64, units: &UnitContext) -> Result<Complex64> {
    check_inputs(t, omega, omega_big, m, c)?;
    Ok(DrivenOscillator::new(omega, omega_big, m, c, units).alpha(t))
}

/// `|α(t)|²` in the closed trigonometric form.
pub fn alpha_sq_full(t: f64, omega: f64, omega_big: f64, m: f64, c: f64, units: &UnitContext) -> Result<f64> {
    check_inputs(t, omega, omega_big, m, c)?;
    let (u, v) = (omega + omega_big, omega - omega_big);
    let pref = c * c * omega / (2.0 * m * units.hbar * (u * v).powi(2));
    // cos ωt - cos Ωt = -2 sin((ω+Ω)t/2) sin((ω-Ω)t/2)
    let a = -2.0 * (0.5 * u * t).sin() * (0.5 * v * t).sin();
    let b = (omega * t).sin() - omega_big / omega * (omega_big * t).sin();
    Ok(pref * (a * a + b * b))
}

/// `Re α(t)²` in closed form:
///
/// ```text
/// C²/(8mωħ) { [cos 2(ω+Ω)t - 2cos(ω+Ω)t + 1]/(ω+Ω)²
///           + [cos 2(ω-Ω)t - 2cos(ω-Ω)t + 1]/(ω-Ω)²
///           + 2[cos 2ωt - cos(ω+Ω)t - cos(ω-Ω)t + 1]/(ω²-Ω²) }
/// ```
///
/// Each bracket is rewritten with half-angle sines so that it vanishes
/// without cancellation at `t = 0`.
pub fn re_alpha_sq_full(t: f64, omega: f64, omega_big: f64, m: f64, c: f64, units: &UnitContext) -> Result<f64> {
    check_inputs(t, omega, omega_big, m, c)?;
    let (u, v) = (omega + omega_big, omega - omega_big);
    let scale = c * c / (8.0 * m * omega * units.hbar);
    // cos 2x - 2 cos x + 1 = -4 cos x sin²(x/2)
    let single = |x: f64| {
        let h = (0.5 * x).sin();
        -4.0 * x.cos() * h * h
    };
    // cos(x+y) - cos x - cos y + 1 = 4 sin²(x/2) sin²(y/2) - sin x sin y
    let (hu, hv) = ((0.5 * u * t).sin(), (0.5 * v * t).sin());
    let cross = 4.0 * hu * hu * hv * hv - (u * t).sin() * (v * t).sin();
    Ok(scale * (single(u * t) / (u * u) + single(v * t) / (v * v) + 2.0 * cross / (u * v)))
}

/// `ch(2r) [|α|² - th(2r) Re α²]`, evaluated as `x² e^{-2r} + y² e^{2r}` with
/// `x² = (|α|² + Re α²)/2`, `y² = (|α|² - Re α²)/2`.
#[allow(clippy::too_many_arguments)]
pub fn alpha_sq_squeezed(
    t: f64,
    omega: f64,
    omega_big: f64,
    m: f64,
    c: f64,
    r: f64,
    units: &UnitContext,
) -> Result<f64> {
    if !r.is_finite() {
        return Err(Error::invalid("r", "must be finite"));
    }
    let abs_sq = alpha_sq_full(t, omega, omega_big, m, c, units)?;
    if r == 0.0 {
        return Ok(abs_sq);
    }
    let re_sq = re_alpha_sq_full(t, omega, omega_big, m, c, units)?;
    let x2 = (0.5 * (abs_sq + re_sq)).max(0.0);
    let y2 = (0.5 * (abs_sq - re_sq)).max(0.0);
    Ok(squeeze(x2, y2, r))
}

/// Oscillators of one index set with their thermal weights, ready for
/// repeated evaluation.
#[derive(Debug, Clone)]
pub(crate) struct FullTerms {
    oscillators: Vec<DrivenOscillator>,
    weights: Vec<f64>,
    half_dx2: f64,
    squeezing: f64,
}

impl FullTerms {
    pub(crate) fn new(s: &Scenario<'_>, idx: &[usize], factor: Factor) -> Result<Self> {
        s.validate(idx)?;
        let oscillators = idx
            .iter()
            .map(|&k| DrivenOscillator::from_bath(s.bath, k, &s.system, &s.units))
            .collect::<Result<Vec<_>>>()?;
        let weights = idx
            .iter()
            .map(|&k| s.units.thermal_weight(factor, s.bath.omegas()[k], s.env.temperature))
            .collect();
        Ok(FullTerms {
            oscillators,
            weights,
            half_dx2: 0.5 * s.system.separation_sq(),
            squeezing: s.env.squeezing,
        })
    }

    #[inline]
    pub(crate) fn ln_factor(&self, t: f64) -> f64 {
        let mut acc = NeumaierSum::new();
        for (osc, &w) in self.oscillators.iter().zip(&self.weights) {
            let (x2, y2) = osc.components(t);
            acc.add(w * squeeze(x2, y2, self.squeezing));
        }
        -self.half_dx2 * acc.value()
    }
}

fn ln_factor(t: f64, s: &Scenario<'_>, idx: &[usize], factor: Factor) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", "must be non-negative and finite"));
    }
    Ok(FullTerms::new(s, idx, factor)?.ln_factor(t))
}

pub fn ln_gamma_full(t: f64, s: &Scenario<'_>, idx: &[usize]) -> Result<f64> {
    ln_factor(t, s, idx, Factor::Decoherence)
}

/// `|Γ(t)|` over the traced-out set `idx`, squeezed when `s.env.squeezing ≠ 0`.
pub fn gamma_full(t: f64, s: &Scenario<'_>, idx: &[usize]) -> Result<f64> {
    ln_gamma_full(t, s, idx).map(f64::exp)
}

pub fn ln_b_full(t: f64, s: &Scenario<'_>, idx: &[usize]) -> Result<f64> {
    ln_factor(t, s, idx, Factor::Distinguishability)
}

/// `B(t)` over the macrofraction `idx`.
pub fn b_full(t: f64, s: &Scenario<'_>, idx: &[usize]) -> Result<f64> {
    ln_b_full(t, s, idx).map(f64::exp)
}

/// Default averaging window and sample count for `idx`: `10⁴` periods of the
/// slowest bath frequency, sampled 20 times per period of `2(ω_max + Ω)`, the
/// fastest frequency in the squeezed amplitude.
pub fn default_window(bath: &BathSpec, system: &SystemSpec, idx: &[usize]) -> (f64, usize) {
    let (lo, hi) = bath.frequency_span(idx);
    let tau = average::default_tau(lo);
    (tau, average::default_samples(tau, 2.0 * (hi + system.omega)))
}

/// Time average of `|Γ|` or `B` over `[0, τ)` by uniform sampling.
pub fn time_average_numeric(
    factor: Factor,
    s: &Scenario<'_>,
    idx: &[usize],
    tau: f64,
    n_samples: usize,
) -> Result<TimeAverage> {
    average::check_window(tau, n_samples, average::MIN_SAMPLES)?;
    let terms = FullTerms::new(s, idx, factor)?;
    let mut acc = Accumulator::new(n_samples);
    for i in 0..n_samples {
        acc.push(terms.ln_factor(average::sample_time(i, tau, n_samples)).exp());
    }
    Ok(acc.finish(tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pqml::pqml_propagator;
    use crate::EnvInitState;
    use alloc::vec;
    use core::f64::consts::PI;

    const NAT: UnitContext = UnitContext::NATURAL;

    #[test]
    fn vanishes_at_zero_time() {
        for &r in &[0.0, 0.5, 3.0] {
            assert_eq!(alpha_sq_squeezed(0.0, 5.0, 1.0, 1.0, 1.0, r, &NAT).unwrap(), 0.0);
        }
        assert_eq!(alpha_sq_full(0.0, 5.0, 1.0, 1.0, 1.0, &NAT).unwrap(), 0.0);
        assert_eq!(re_alpha_sq_full(0.0, 5.0, 1.0, 1.0, 1.0, &NAT).unwrap(), 0.0);
    }

    #[test]
    fn commensurate_revival() {
        let (big, w) = (1.0, 2.0);
        let a = alpha_sq_full(2.0 * PI / big, w, big, 1.0, 1.0, &NAT).unwrap();
        assert!(a < 1e-28);
    }

    #[test]
    fn resonance_rejected() {
        assert!(matches!(
            alpha_sq_full(1.0, 3.0, 3.0 * (1.0 + 1e-7), 1.0, 1.0, &NAT),
            Err(Error::Resonance { .. })
        ));
        assert!(alpha_sq_full(1.0, 3.0, 3.0 * (1.0 + 1e-5), 1.0, 1.0, &NAT).is_ok());
    }

    #[test]
    fn closed_forms_agree_with_complex_amplitude() {
        let (w, big, m, c) = (5.3, 0.9, 1.7, 0.6);
        for i in 0..500 {
            let t = 0.037 * i as f64;
            let a = alpha_full(t, w, big, m, c, &NAT).unwrap();
            let abs_sq = alpha_sq_full(t, w, big, m, c, &NAT).unwrap();
            let re_sq = re_alpha_sq_full(t, w, big, m, c, &NAT).unwrap();
            let scale = c * c / (m * w.powi(3));
            assert!((a.norm_sqr() - abs_sq).abs() < 1e-13 * scale, "t = {t}");
            assert!(((a * a).re - re_sq).abs() < 1e-13 * scale, "t = {t}");
            assert!(re_sq.abs() <= abs_sq * (1.0 + 1e-12) + 1e-15 * scale);
        }
    }

    #[test]
    fn static_central_system_matches_pqml() {
        let (w, m, c) = (3.1, 0.4, 1.3);
        for i in 0..300 {
            let t = 0.011 * i as f64;
            let p = pqml_propagator(t, w, m, c, &NAT).unwrap();
            let full = alpha_full(t, w, 0.0, m, c, &NAT).unwrap();
            assert!((p.alpha - full).norm() < 1e-14);
            let re = re_alpha_sq_full(t, w, 0.0, m, c, &NAT).unwrap();
            assert!(((p.alpha * p.alpha).re - re).abs() < 1e-13);
        }
    }

    #[test]
    fn squeezing_growth() {
        let (w, big, m, c, t) = (5.0, 1.0, 1.0, 1.0, 0.77);
        let r0 = alpha_sq_squeezed(t, w, big, m, c, 0.0, &NAT).unwrap();
        assert_eq!(r0, alpha_sq_full(t, w, big, m, c, &NAT).unwrap());
        let r5 = alpha_sq_squeezed(t, w, big, m, c, 5.0, &NAT).unwrap();
        let r6 = alpha_sq_squeezed(t, w, big, m, c, 6.0, &NAT).unwrap();
        assert!((r6 / r5 / 2f64.exp().powi(1) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn factors_ordered_and_trivial() {
        let bath = BathSpec::new(vec![5.0, 7.0], vec![1.0, 1.0], vec![1.0, 2.0]).unwrap();
        let sys = SystemSpec {
            mass: 1.0,
            omega: 1.0,
            x1: 0.0,
            x2: 0.7,
        };
        let s = Scenario::new(&bath, sys, EnvInitState::squeezed(2.0, 0.3), NAT);
        assert_eq!(gamma_full(0.0, &s, &[0, 1]).unwrap(), 1.0);
        for i in 0..200 {
            let t = 0.05 * i as f64;
            let g = gamma_full(t, &s, &[0, 1]).unwrap();
            let b = b_full(t, &s, &[0, 1]).unwrap();
            assert!(g > 0.0 && g <= b && b <= 1.0);
        }
        let still = Scenario::new(&bath, SystemSpec { x2: 0.0, ..sys }, s.env, NAT);
        assert_eq!(gamma_full(3.0, &still, &[0, 1]).unwrap(), 1.0);
    }

    #[test]
    fn constant_average_is_exact() {
        let bath = BathSpec::new(vec![5.0], vec![1.0], vec![1.0]).unwrap();
        let sys = SystemSpec {
            mass: 1.0,
            omega: 1.0,
            x1: 0.3,
            x2: 0.3,
        };
        let s = Scenario::new(&bath, sys, EnvInitState::thermal(1.0), NAT);
        let avg = time_average_numeric(Factor::Decoherence, &s, &[0], 10.0, 1000).unwrap();
        assert_eq!(avg.value, 1.0);
        assert!(time_average_numeric(Factor::Decoherence, &s, &[0], 10.0, 999).is_err());
    }
}
