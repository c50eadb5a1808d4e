//! Long-time averages of bounded almost periodic functions by uniform sampling.
//!
//! The error is governed by the averaging window (ergodic convergence), not by
//! local smoothness, so no adaptivity is attempted. The estimate over the first
//! half of the window is kept as a convergence indicator.

use core::f64::consts::PI;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::sum::NeumaierSum;
use crate::{Error, Result};

/// Window length in units of the slowest period used when none is given.
pub const DEFAULT_PERIODS: f64 = 1e4;
/// Samples per period of the fastest frequency.
pub const SAMPLES_PER_PERIOD: f64 = 20.0;
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeAverage {
    /// Average over `[0, τ)`.
    pub value: f64,
    /// Average over `[0, τ/2)` from the same samples.
    pub half_value: f64,
    pub tau: f64,
    pub n_samples: usize,
}

impl TimeAverage {
    /// `|⟨f⟩_{τ/2} - ⟨f⟩_τ|`.
    pub fn indicator(&self) -> f64 {
        (self.half_value - self.value).abs()
    }
}

/// Running mean over the uniform grid `t_i = i τ / n`.
#[derive(Debug, Clone)]
pub(crate) struct Accumulator {
    n: usize,
    seen: usize,
    sum: NeumaierSum,
    half: f64,
}

impl Accumulator {
    pub(crate) fn new(n: usize) -> Self {
        Accumulator {
            n,
            seen: 0,
            sum: NeumaierSum::new(),
            half: 0.0,
        }
    }

    #[inline]
    pub(crate) fn push(&mut self, x: f64) {
        self.sum.add(x);
        self.seen += 1;
        if self.seen == self.n / 2 {
            self.half = self.sum.value() / self.seen as f64;
        }
    }

    pub(crate) fn finish(&self, tau: f64) -> TimeAverage {
        TimeAverage {
            value: self.sum.value() / self.seen as f64,
            half_value: self.half,
            tau,
            n_samples: self.seen,
        }
    }
}

pub(crate) fn check_window(tau: f64, n_samples: usize, min_samples: usize) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid("tau", "must be positive and finite"));
    }
    if n_samples < min_samples {
        return Err(Error::invalid("n_samples", "too few samples"));
    }
    Ok(())
}

/// Sample time `i` of an `n`-point grid over `[0, τ)`.
#[inline]
pub fn sample_time(i: usize, tau: f64, n_samples: usize) -> f64 {
    tau * (i as f64 / n_samples as f64)
}

/// `(1/τ) ∫₀^τ f(t) dt` by the left Riemann sum on `n_samples` points.
pub fn time_average<F: FnMut(f64) -> f64>(mut f: F, tau: f64, n_samples: usize) -> Result<TimeAverage> {
    check_window(tau, n_samples, 2)?;
    let mut acc = Accumulator::new(n_samples);
    for i in 0..n_samples {
        acc.push(f(sample_time(i, tau, n_samples)));
    }
    Ok(acc.finish(tau))
}

/// `DEFAULT_PERIODS` periods of the slowest frequency.
pub fn default_tau(slowest: f64) -> f64 {
    DEFAULT_PERIODS * 2.0 * PI / slowest
}

/// Enough samples for `SAMPLES_PER_PERIOD` points per period of `fastest`.
pub fn default_samples(tau: f64, fastest: f64) -> usize {
    let n = (SAMPLES_PER_PERIOD * tau * fastest / (2.0 * PI)).ceil();
    (n as usize).max(MIN_SAMPLES)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_exact() {
        let r = time_average(|_| 1.0, 3.0, 1000).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.indicator(), 0.0);
    }

    #[test]
    fn cosine_squared_averages_to_half() {
        let w = 7.3;
        let tau = default_tau(w);
        let n = default_samples(tau, w);
        let r = time_average(|t| (w * t).cos().powi(2), tau, n).unwrap();
        assert!((r.value - 0.5).abs() < 1e-6);
        assert!(r.indicator() < 1e-5);
    }

    #[test]
    fn bad_window_rejected() {
        assert!(time_average(|_| 1.0, 0.0, 10).is_err());
        assert!(time_average(|_| 1.0, 1.0, 1).is_err());
    }
}
