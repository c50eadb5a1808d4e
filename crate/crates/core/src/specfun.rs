//! Modified Bessel function of the first kind, order zero.
//!
//! `I0(z) = (1/π) ∫₀^π e^{z cos θ} dθ`. The time-averaged factor of a single
//! oscillator is `e^{-a} I0(a)`, and averages over large macrofractions are
//! products of many such factors, so everything is also available in log form.

use core::f64::consts::PI;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Above this argument the asymptotic series replaces the power series.
const SERIES_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct I0Result {
    /// `I0(z)`; `+inf` once it overflows.
    pub value: f64,
    /// `ln I0(z)`.
    pub log_value: f64,
}

/// `(Σ_{k≥1} (z²/4)^k / (k!)²)`, i.e. `I0(z) - 1`, summed without cancellation.
fn series_excess(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term <= 1e-17 * (1.0 + sum) {
            return sum;
        }
        k += 1.0;
    }
}

/// `ln(√(2πz) e^{-z} I0(z))` from the large-argument expansion
/// `1 + 1/(8z) + 9/(2!(8z)²) + ...`.
fn asymptotic_log_correction(z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * z * k);
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
        k += 1.0;
    }
    sum.ln()
}

/// `I0(z)` for `z ≥ 0`.
pub fn bessel_i0(z: f64) -> Result<I0Result> {
    let scaled = ln_scaled_i0(z)?;
    if z <= SERIES_LIMIT {
        let excess = series_excess(z);
        return Ok(I0Result {
            value: 1.0 + excess,
            log_value: excess.ln_1p(),
        });
    }
    let log_value = scaled + z;
    Ok(I0Result {
        value: log_value.exp(),
        log_value,
    })
}

/// `ln(e^{-z} I0(z))`, the log of the single-oscillator time average. It lies
/// in `(-∞, 0]` and is strictly decreasing.
pub fn ln_scaled_i0(z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::invalid("z", "I0 is only evaluated for non-negative arguments"));
    }
    if z.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    if z <= SERIES_LIMIT {
        Ok(series_excess(z).ln_1p() - z)
    } else {
        Ok(asymptotic_log_correction(z) - 0.5 * (2.0 * PI * z).ln())
    }
}

/// Composite trapezoidal rule for `(1/π) ∫₀^π e^{z cos θ} dθ` with `panels`
/// sub-intervals.
///
/// The integrand extends to a smooth periodic function, so the rule converges
/// geometrically once `panels` is well above `z`. Independent of
/// [`bessel_i0`]; used to check it.
pub fn bessel_i0_oracle(z: f64, panels: usize) -> Result<f64> {
    if panels < 64 {
        return Err(Error::invalid("panels", "at least 64 panels are required"));
    }
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::invalid("z", "must be non-negative and finite"));
    }
    let h = PI / panels as f64;
    // e^{z (cos θ - 1)} with 1 - cos θ = 2 sin²(θ/2)
    let scaled = |theta: f64| {
        let s = (0.5 * theta).sin();
        (-2.0 * z * s * s).exp()
    };
    let mut acc = 0.5 * (scaled(0.0) + scaled(PI));
    for i in 1..panels {
        acc += scaled(i as f64 * h);
    }
    Ok(z.exp() * acc / panels as f64)
}

/// Leading-order `ln I0(z) ≈ z - ½ ln(2πz)`.
pub fn i0_asymptotic(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::invalid("z", "asymptotic form needs a positive argument"));
    }
    Ok(z - 0.5 * (2.0 * PI * z).ln())
}
