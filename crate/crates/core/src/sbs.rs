//! Broadcast-structure verdicts, formation times and macrofraction scaling.
//!
//! A spectrum broadcast structure has formed once both the decoherence factor
//! over the traced-out fraction and the overlap over an observed macrofraction
//! are below a threshold `ε`.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::full::FullTerms;
use crate::pqml::{avg_analytic, PqmlTerms};
use crate::qml::QmlParams;
use crate::sum::compensated_sum;
use crate::{Error, Factor, Result, Scenario};

/// Threshold used when none is given.
pub const DEFAULT_EPSILON: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SbsVerdict {
    pub formed: bool,
    pub gamma_value: f64,
    pub b_value: f64,
    pub epsilon: f64,
}

pub fn sbs_verdict(gamma: f64, b: f64, epsilon: f64) -> Result<SbsVerdict> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon", "must lie in (0, 1)"));
    }
    Ok(SbsVerdict {
        formed: gamma <= epsilon && b <= epsilon,
        gamma_value: gamma,
        b_value: b,
        epsilon,
    })
}

/// A regime evaluated on a fixed traced-out set and a fixed macrofraction.
pub trait FactorModel {
    /// `(ln|Γ(t)|, ln B(t))`.
    fn ln_factors(&self, t: f64) -> (f64, f64);

    /// Closed-form first time at which both factors reach `ε`, if the regime
    /// has one.
    fn analytic_formation_time(&self, _epsilon: f64) -> Option<f64> {
        None
    }
}

/// Measurement limit.
#[derive(Debug, Clone)]
pub struct QmlModel {
    rate_gamma: f64,
    rate_b: f64,
}

impl QmlModel {
    pub fn new(params: &QmlParams, unobserved: &[usize], observed: &[usize]) -> Result<Self> {
        Ok(QmlModel {
            rate_gamma: params.decay_rate(unobserved, Factor::Decoherence)?,
            rate_b: params.decay_rate(observed, Factor::Distinguishability)?,
        })
    }
}

impl FactorModel for QmlModel {
    fn ln_factors(&self, t: f64) -> (f64, f64) {
        (-self.rate_gamma * t * t, -self.rate_b * t * t)
    }

    /// Inverts `K t² = ln(1/ε)` for both factors and takes the later time.
    fn analytic_formation_time(&self, epsilon: f64) -> Option<f64> {
        let target = -epsilon.ln();
        if target <= 0.0 {
            return Some(0.0);
        }
        if self.rate_gamma <= 0.0 || self.rate_b <= 0.0 {
            return None;
        }
        Some((target / self.rate_gamma).sqrt().max((target / self.rate_b).sqrt()))
    }
}

/// Partial measurement limit.
#[derive(Debug, Clone)]
pub struct PqmlModel {
    gamma: PqmlTerms,
    b: PqmlTerms,
}

impl PqmlModel {
    pub fn new(s: &Scenario<'_>, unobserved: &[usize], observed: &[usize]) -> Result<Self> {
        Ok(PqmlModel {
            gamma: PqmlTerms::new(s, unobserved, Factor::Decoherence)?,
            b: PqmlTerms::new(s, observed, Factor::Distinguishability)?,
        })
    }
}

impl FactorModel for PqmlModel {
    fn ln_factors(&self, t: f64) -> (f64, f64) {
        (self.gamma.ln_factor(t), self.b.ln_factor(t))
    }
}

/// Full model, squeezing taken from the scenario.
#[derive(Debug, Clone)]
pub struct FullModel {
    gamma: FullTerms,
    b: FullTerms,
}

impl FullModel {
    pub fn new(s: &Scenario<'_>, unobserved: &[usize], observed: &[usize]) -> Result<Self> {
        Ok(FullModel {
            gamma: FullTerms::new(s, unobserved, Factor::Decoherence)?,
            b: FullTerms::new(s, observed, Factor::Distinguishability)?,
        })
    }
}

impl FactorModel for FullModel {
    fn ln_factors(&self, t: f64) -> (f64, f64) {
        (self.gamma.ln_factor(t), self.b.ln_factor(t))
    }
}

/// Result of a formation-time search on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Formation {
    /// First grid time with both factors `≤ ε`; `None` if never reached.
    pub time: Option<f64>,
    /// Largest `max(|Γ|, B)` on the grid after the first crossing. Values
    /// above `ε` mean the factors revived.
    pub max_after_crossing: Option<f64>,
    pub analytic: Option<f64>,
}

/// Scans `t_i = i t_max / t_steps`, `i = 0..=t_steps`.
pub fn formation_time<M: FactorModel + ?Sized>(
    model: &M,
    epsilon: f64,
    t_max: f64,
    t_steps: usize,
) -> Result<Formation> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid("epsilon", "must lie in (0, 1]"));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::invalid("t_max", "must be positive and finite"));
    }
    if t_steps == 0 {
        return Err(Error::invalid("t_steps", "must be at least one"));
    }
    let ln_eps = epsilon.ln();
    let mut time = None;
    let mut worst_after = f64::NEG_INFINITY;
    for i in 0..=t_steps {
        let t = t_max * (i as f64 / t_steps as f64);
        let (lg, lb) = model.ln_factors(t);
        match time {
            None if lg <= ln_eps && lb <= ln_eps => time = Some(t),
            Some(_) => worst_after = worst_after.max(lg.max(lb)),
            None => {}
        }
    }
    let max_after_crossing = match time {
        Some(_) if worst_after.is_finite() => Some(worst_after.exp()),
        _ => None,
    };
    Ok(Formation {
        time,
        max_after_crossing,
        analytic: model.analytic_formation_time(epsilon),
    })
}

/// What [`macrofraction_scaling`] evaluates on each index set.
#[derive(Debug, Clone, Copy)]
pub enum ScalingModel<'a> {
    /// Measurement-limit factor at a fixed time.
    QmlAt { params: &'a QmlParams, t: f64 },
    /// Partial-limit infinite-time average.
    PqmlAverage { scenario: Scenario<'a> },
    /// Full-model factor at a fixed time.
    FullAt { scenario: Scenario<'a>, t: f64 },
}

impl ScalingModel<'_> {
    fn ln_factor(&self, factor: Factor, idx: &[usize]) -> Result<f64> {
        match *self {
            ScalingModel::QmlAt { params, t } => Ok(-params.decay_rate(idx, factor)? * t * t),
            ScalingModel::PqmlAverage { scenario } => Ok(avg_analytic(&scenario, idx)?.log_avg(factor)),
            ScalingModel::FullAt { scenario, t } => Ok(FullTerms::new(&scenario, idx, factor)?.ln_factor(t)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scaling {
    /// `(size, ln factor)` pairs.
    pub points: Vec<(usize, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

/// `ln factor` over the first `size` members of `pool` for every size, with a
/// least-squares line through the points.
pub fn macrofraction_scaling(
    model: ScalingModel<'_>,
    factor: Factor,
    pool: &[usize],
    sizes: &[usize],
) -> Result<Scaling> {
    if sizes.len() < 2 {
        return Err(Error::invalid("sizes", "need at least two sizes to fit a slope"));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("sizes", "must be strictly increasing"));
    }
    if sizes[sizes.len() - 1] > pool.len() {
        return Err(Error::invalid("sizes", "largest size exceeds the oscillator pool"));
    }
    let points = sizes
        .iter()
        .map(|&size| Ok((size, model.ln_factor(factor, &pool[..size])?)))
        .collect::<Result<Vec<_>>>()?;
    let (slope, intercept) = fit_line(&points);
    let max_residual = points
        .iter()
        .map(|&(x, y)| (y - (intercept + slope * x as f64)).abs())
        .fold(0.0, f64::max);
    Ok(Scaling {
        points,
        slope,
        intercept,
        max_residual,
    })
}

fn fit_line(points: &[(usize, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = compensated_sum(points.iter().map(|p| p.0 as f64)) / n;
    let my = compensated_sum(points.iter().map(|p| p.1)) / n;
    let sxy = compensated_sum(points.iter().map(|p| (p.0 as f64 - mx) * (p.1 - my)));
    let sxx = compensated_sum(points.iter().map(|p| (p.0 as f64 - mx).powi(2)));
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
