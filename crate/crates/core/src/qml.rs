//! Measurement limit: only the interaction term `X ⊗ Σ C_k x_k` is kept.
//!
//! Bath masses and frequencies are set to one, so the thermal weight is
//! `coth(β/2)` or `tanh(β/2)` with a dimensionless `β`, and both factors are
//! Gaussian in time:
//!
//! ```text
//! ln|Γ|(t) = -(ΔX²/2ħ) t² coth(β/2) Σ_{k∈(1-f)E} C_k²
//! ln B(t)  = -(ΔX²/2ħ) t² tanh(β/2) Σ_{k∈mac} C_k²
//! ```
//!
//! The short-time expansion of the partial model with `m = ω = 1` gives half
//! of this exponent. The two limits are kept as stated and not reconciled.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::bath::thermal_weight;
use crate::sum::compensated_sum;
use crate::{Error, Factor, Result, UnitContext};

#[derive(Debug, Clone, PartialEq)]
pub struct QmlParams {
    /// `|X - X'|`.
    pub dx: f64,
    /// Dimensionless inverse temperature.
    pub beta_eff: f64,
    pub couplings: Vec<f64>,
    pub units: UnitContext,
}

impl QmlParams {
    pub fn new(dx: f64, beta_eff: f64, couplings: Vec<f64>, units: UnitContext) -> Result<Self> {
        let p = QmlParams {
            dx,
            beta_eff,
            couplings,
            units,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dx >= 0.0 && self.dx.is_finite()) {
            return Err(Error::invalid("dx", "must be non-negative and finite"));
        }
        if !(self.beta_eff > 0.0) {
            return Err(Error::invalid("beta", "must be positive"));
        }
        self.units.validate()
    }

    /// `coth(β/2)` or `tanh(β/2)`.
    pub fn weight(&self, factor: Factor) -> f64 {
        thermal_weight(factor, 0.5 * self.beta_eff)
    }

    /// `Σ_{k∈idx} C_k²`.
    pub fn coupling_sq_sum(&self, idx: &[usize]) -> Result<f64> {
        let n = self.couplings.len();
        if let Some(&index) = idx.iter().find(|&&k| k >= n) {
            return Err(Error::IndexOutOfRange { index, n });
        }
        Ok(compensated_sum(idx.iter().map(|&k| self.couplings[k].powi(2))))
    }

    /// The rate `K` in `ln factor(t) = -K t²`.
    pub fn decay_rate(&self, idx: &[usize], factor: Factor) -> Result<f64> {
        self.validate()?;
        let c2 = self.coupling_sq_sum(idx)?;
        Ok(self.dx * self.dx * self.weight(factor) * c2 / (2.0 * self.units.hbar))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("t", "must be non-negative and finite"))
    }
}

pub fn ln_gamma_qml(t: f64, params: &QmlParams, idx: &[usize]) -> Result<f64> {
    check_time(t)?;
    Ok(-params.decay_rate(idx, Factor::Decoherence)? * t * t)
}

/// `|Γ(t)|` over the traced-out set `idx`.
pub fn gamma_qml(t: f64, params: &QmlParams, idx: &[usize]) -> Result<f64> {
    ln_gamma_qml(t, params, idx).map(f64::exp)
}

pub fn ln_b_qml(t: f64, params: &QmlParams, idx: &[usize]) -> Result<f64> {
    check_time(t)?;
    Ok(-params.decay_rate(idx, Factor::Distinguishability)? * t * t)
}

/// `B(t)` over the macrofraction `idx`.
pub fn b_qml(t: f64, params: &QmlParams, idx: &[usize]) -> Result<f64> {
    ln_b_qml(t, params, idx).map(f64::exp)
}

/// Decoherence and distinguishability times.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Timescales {
    pub tau_d: f64,
    pub tau_b: f64,
}

/// `1/τ = |X-X'| √(w C̄² / 2ħ)` with `w = coth(β/2)` for `τ_D` and
/// `tanh(β/2)` for `τ_B`. `None` when `dx = 0`: nothing ever decays.
pub fn timescales(dx: f64, beta_eff: f64, c2_mean: f64, units: &UnitContext) -> Result<Option<Timescales>> {
    if !(dx >= 0.0 && dx.is_finite()) {
        return Err(Error::invalid("dx", "must be non-negative and finite"));
    }
    if !(beta_eff > 0.0) {
        return Err(Error::invalid("beta", "must be positive"));
    }
    if !(c2_mean > 0.0) {
        return Err(Error::invalid("c2_mean", "must be positive"));
    }
    units.validate()?;
    if dx == 0.0 {
        return Ok(None);
    }
    let inv = |factor| dx * (thermal_weight(factor, 0.5 * beta_eff) * c2_mean / (2.0 * units.hbar)).sqrt();
    Ok(Some(Timescales {
        tau_d: 1.0 / inv(Factor::Decoherence),
        tau_b: 1.0 / inv(Factor::Distinguishability),
    }))
}

/// Law-of-large-numbers form `ln factor = -size (t/τ)²`, with the sum of
/// squared couplings replaced by `size · C̄²`.
pub fn ln_lln_factor(
    t: f64,
    dx: f64,
    beta_eff: f64,
    c2_mean: f64,
    size: usize,
    factor: Factor,
    units: &UnitContext,
) -> Result<f64> {
    check_time(t)?;
    if size == 0 {
        return Err(Error::invalid("size", "must be at least one"));
    }
    match timescales(dx, beta_eff, c2_mean, units)? {
        None => Ok(0.0),
        Some(ts) => {
            let tau = match factor {
                Factor::Decoherence => ts.tau_d,
                Factor::Distinguishability => ts.tau_b,
            };
            Ok(-(size as f64) * (t / tau).powi(2))
        }
    }
}

pub fn lln_factor(
    t: f64,
    dx: f64,
    beta_eff: f64,
    c2_mean: f64,
    size: usize,
    factor: Factor,
    units: &UnitContext,
) -> Result<f64> {
    ln_lln_factor(t, dx, beta_eff, c2_mean, size, factor, units).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const NAT: UnitContext = UnitContext::NATURAL;

    fn params(dx: f64, beta: f64, c: Vec<f64>) -> QmlParams {
        QmlParams::new(dx, beta, c, NAT).unwrap()
    }

    #[test]
    fn trivial_values() {
        let p = params(1.3, 0.7, vec![1.0, 2.0]);
        assert_eq!(gamma_qml(0.0, &p, &[0, 1]).unwrap(), 1.0);
        assert_eq!(b_qml(0.0, &p, &[0, 1]).unwrap(), 1.0);
        let p0 = params(0.0, 0.7, vec![1.0, 2.0]);
        assert_eq!(gamma_qml(5.0, &p0, &[0, 1]).unwrap(), 1.0);
        assert!(gamma_qml(-1.0, &p, &[0]).is_err());
        assert!(gamma_qml(1.0, &p, &[2]).is_err());
    }

    #[test]
    fn zero_temperature_single_coupling() {
        let p = params(1.0, 800.0, vec![1.0]);
        let g = gamma_qml(1.0, &p, &[0]).unwrap();
        let b = b_qml(1.0, &p, &[0]).unwrap();
        let expected = (-0.5f64).exp();
        assert!((g - expected).abs() < 1e-15);
        assert_eq!(g, b);
    }

    #[test]
    fn tanh_coth_product_identity() {
        let p = params(0.8, 1.7, vec![0.9, 1.1, 0.4]);
        let idx = [0, 1, 2];
        let t = 1.3;
        let lg = ln_gamma_qml(t, &p, &idx).unwrap();
        let lb = ln_b_qml(t, &p, &idx).unwrap();
        let c2: f64 = [0.81, 1.21, 0.16].iter().sum();
        let amp = 0.5 * 0.64 * t * t * c2;
        assert!((lg * lb / (amp * amp) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_gaussian_in_time() {
        let p = params(2.0, 0.3, vec![0.5, 0.25]);
        let a = ln_gamma_qml(0.7, &p, &[0, 1]).unwrap();
        let b = ln_gamma_qml(1.4, &p, &[0, 1]).unwrap();
        assert!((b / a - 4.0).abs() < 1e-12);
    }

    #[test]
    fn timescale_examples() {
        let ts = timescales(1.0, 2.0, 2.0, &NAT).unwrap().unwrap();
        assert!((1.0 / ts.tau_d - (1.0 / 1f64.tanh()).sqrt()).abs() < 1e-14);
        assert!((1.0 / ts.tau_b - 1f64.tanh().sqrt()).abs() < 1e-14);

        let cold = timescales(1.0, 200.0, 1.0, &NAT).unwrap().unwrap();
        assert_eq!(cold.tau_b, cold.tau_d);

        let a = timescales(1.0, 0.5, 1.0, &NAT).unwrap().unwrap();
        let b = timescales(2.0, 0.5, 1.0, &NAT).unwrap().unwrap();
        assert!((a.tau_d / b.tau_d - 2.0).abs() < 1e-14);
        assert!((a.tau_b / b.tau_b - 2.0).abs() < 1e-14);
        assert!(a.tau_b >= a.tau_d);

        assert_eq!(timescales(0.0, 0.5, 1.0, &NAT).unwrap(), None);
    }

    #[test]
    fn lln_size_doubling_squares_factor() {
        let f = |size| lln_factor(0.3, 1.0, 1.0, 1.5, size, Factor::Distinguishability, &NAT).unwrap();
        assert!((f(20) - f(10).powi(2)).abs() < 1e-15);
        assert_eq!(lln_factor(0.0, 1.0, 1.0, 1.5, 7, Factor::Decoherence, &NAT).unwrap(), 1.0);
    }
}
