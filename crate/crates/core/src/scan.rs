//! Time-averaged factors of the full model on a (temperature, squeezing) grid.
//!
//! One bath realisation is used for the whole grid. `⟨|Γ|⟩` is taken over the
//! traced-out set and `⟨B⟩` over the first macrofraction. Rows of constant
//! squeezing are independent; a row evaluates the bath amplitudes once per
//! sample time and reuses them for every temperature. Each grid point is
//! reduced in a fixed order, so a point's value does not depend on which rows
//! are computed together or in which order.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::average::{self, Accumulator};
use crate::full::{self, squeeze, DrivenOscillator};
use crate::sum::NeumaierSum;
use crate::{BathSpec, Error, Factor, Partition, Result, SystemSpec, UnitContext};

/// A grid axis.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged, deny_unknown_fields))]
pub enum Axis {
    Range {
        min: f64,
        max: f64,
        points: usize,
        #[cfg_attr(feature = "serde", serde(default))]
        log: bool,
    },
    Values { values: Vec<f64> },
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>> {
        match *self {
            Axis::Values { ref values } => {
                if values.is_empty() {
                    return Err(Error::invalid("axis", "no values given"));
                }
                Ok(values.clone())
            }
            Axis::Range { min, max, points, log } => {
                if points == 0 {
                    return Err(Error::invalid("axis", "range needs at least one point"));
                }
                if !(min.is_finite() && max.is_finite() && min <= max) {
                    return Err(Error::invalid("axis", "range needs finite min <= max"));
                }
                if log && !(min > 0.0) {
                    return Err(Error::invalid("axis", "log range needs min > 0"));
                }
                if points == 1 {
                    return Ok(alloc::vec![min]);
                }
                let step = |i: usize| i as f64 / (points - 1) as f64;
                Ok((0..points)
                    .map(|i| {
                        if log {
                            (min.ln() + (max.ln() - min.ln()) * step(i)).exp()
                        } else {
                            min + (max - min) * step(i)
                        }
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BathFingerprint {
    pub seed: Option<u64>,
    pub omega_bar: f64,
    pub delta: f64,
    pub n: usize,
}

impl BathFingerprint {
    pub fn of(bath: &BathSpec) -> Self {
        match bath.origin() {
            Some(o) => BathFingerprint {
                seed: Some(o.seed),
                omega_bar: o.omega_bar,
                delta: o.delta,
                n: bath.len(),
            },
            None => {
                let (lo, hi) = bath.frequency_span(&[]);
                BathFingerprint {
                    seed: None,
                    omega_bar: 0.5 * (lo + hi),
                    delta: hi - lo,
                    n: bath.len(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScanGrid {
    pub temperatures: Vec<f64>,
    pub squeezings: Vec<f64>,
    /// `avg_gamma[i][j]` at `temperatures[i]`, `squeezings[j]`.
    pub avg_gamma: Vec<Vec<f64>>,
    pub avg_b: Vec<Vec<f64>>,
    /// Largest `|⟨f⟩_{τ/2} - ⟨f⟩_τ|` over the grid and both factors.
    pub max_indicator: f64,
    pub bath: BathFingerprint,
    pub unobserved_size: usize,
    pub observed_size: usize,
    pub tau: f64,
    pub n_samples: usize,
}

impl ScanGrid {
    /// `(T, r, ⟨|Γ|⟩, ⟨B⟩)` with temperature outermost.
    pub fn long_rows(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.temperatures.iter().enumerate().flat_map(move |(i, &t)| {
            self.squeezings
                .iter()
                .enumerate()
                .map(move |(j, &r)| (t, r, self.avg_gamma[i][j], self.avg_b[i][j]))
        })
    }
}

/// Averages for one squeezing value across all temperatures.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub avg_gamma: Vec<f64>,
    pub avg_b: Vec<f64>,
    pub max_indicator: f64,
}

/// A validated scan, evaluated row by row.
#[derive(Debug, Clone)]
pub struct ScanPlan {
    unobserved: Vec<DrivenOscillator>,
    observed: Vec<DrivenOscillator>,
    /// `weights_gamma[i][k]`: coth weight of unobserved oscillator `k` at `temperatures[i]`.
    weights_gamma: Vec<Vec<f64>>,
    weights_b: Vec<Vec<f64>>,
    half_dx2: f64,
    temperatures: Vec<f64>,
    squeezings: Vec<f64>,
    tau: f64,
    n_samples: usize,
    fingerprint: BathFingerprint,
}

impl ScanPlan {
    /// `window` overrides the default `(τ, n_samples)` of
    /// [`full::default_window`].
    pub fn new(
        bath: &BathSpec,
        system: &SystemSpec,
        units: &UnitContext,
        partition: &Partition,
        temperatures: &Axis,
        squeezings: &Axis,
        window: Option<(f64, usize)>,
    ) -> Result<Self> {
        system.validate()?;
        units.validate()?;
        if partition.bath_size() != bath.len() {
            return Err(Error::invalid("partition", "built for a different bath size"));
        }
        let observed_idx = partition
            .first_macrofraction()
            .ok_or(Error::invalid("partition", "scan needs an observed macrofraction"))?;
        let unobserved_idx = partition.unobserved();
        let temperatures = temperatures.values()?;
        if temperatures.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::invalid("temperature", "grid values must be positive"));
        }
        let squeezings = squeezings.values()?;
        if squeezings.iter().any(|r| !r.is_finite()) {
            return Err(Error::invalid("squeezing", "grid values must be finite"));
        }

        let build = |idx: &[usize]| {
            idx.iter()
                .map(|&k| DrivenOscillator::from_bath(bath, k, system, units))
                .collect::<Result<Vec<_>>>()
        };
        let weights = |idx: &[usize], factor: Factor| {
            temperatures
                .iter()
                .map(|&temp| {
                    idx.iter()
                        .map(|&k| units.thermal_weight(factor, bath.omegas()[k], temp))
                        .collect()
                })
                .collect()
        };

        let (tau, n_samples) = match window {
            Some(w) => w,
            None => {
                let all: Vec<usize> = unobserved_idx.iter().chain(observed_idx).copied().collect();
                full::default_window(bath, system, &all)
            }
        };
        average::check_window(tau, n_samples, average::MIN_SAMPLES)?;

        Ok(ScanPlan {
            unobserved: build(unobserved_idx)?,
            observed: build(observed_idx)?,
            weights_gamma: weights(unobserved_idx, Factor::Decoherence),
            weights_b: weights(observed_idx, Factor::Distinguishability),
            half_dx2: 0.5 * system.separation_sq(),
            temperatures,
            squeezings,
            tau,
            n_samples,
            fingerprint: BathFingerprint::of(bath),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.squeezings.len()
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temperatures
    }

    pub fn squeezings(&self) -> &[f64] {
        &self.squeezings
    }

    pub fn window(&self) -> (f64, usize) {
        (self.tau, self.n_samples)
    }

    /// Averages for `squeezings[j]`.
    pub fn row(&self, j: usize) -> ScanRow {
        let r = self.squeezings[j];
        let nt = self.temperatures.len();
        let mut acc_g = alloc::vec![Accumulator::new(self.n_samples); nt];
        let mut acc_b = alloc::vec![Accumulator::new(self.n_samples); nt];
        let mut amp_g = alloc::vec![0.0; self.unobserved.len()];
        let mut amp_b = alloc::vec![0.0; self.observed.len()];

        let fill = |oscs: &[DrivenOscillator], out: &mut [f64], t: f64| {
            for (o, q) in oscs.iter().zip(out.iter_mut()) {
                let (x2, y2) = o.components(t);
                *q = squeeze(x2, y2, r);
            }
        };
        let ln_factor = |amps: &[f64], weights: &[f64]| {
            let mut s = NeumaierSum::new();
            for (&w, &q) in weights.iter().zip(amps) {
                s.add(w * q);
            }
            -self.half_dx2 * s.value()
        };

        for i in 0..self.n_samples {
            let t = average::sample_time(i, self.tau, self.n_samples);
            fill(&self.unobserved, &mut amp_g, t);
            fill(&self.observed, &mut amp_b, t);
            for it in 0..nt {
                acc_g[it].push(ln_factor(&amp_g, &self.weights_gamma[it]).exp());
                acc_b[it].push(ln_factor(&amp_b, &self.weights_b[it]).exp());
            }
        }

        let finish = |acc: &[Accumulator]| -> Vec<_> { acc.iter().map(|a| a.finish(self.tau)).collect() };
        let (g, b) = (finish(&acc_g), finish(&acc_b));
        let max_indicator = g.iter().chain(&b).map(|a| a.indicator()).fold(0.0, f64::max);
        ScanRow {
            avg_gamma: g.iter().map(|a| a.value).collect(),
            avg_b: b.iter().map(|a| a.value).collect(),
            max_indicator,
        }
    }

    /// Builds the grid from rows given in squeezing order.
    pub fn assemble(&self, rows: Vec<ScanRow>) -> Result<ScanGrid> {
        if rows.len() != self.n_rows() {
            return Err(Error::invalid("rows", "one row per squeezing value is required"));
        }
        let column = |pick: fn(&ScanRow) -> &Vec<f64>, i: usize| rows.iter().map(|row| pick(row)[i]).collect();
        let nt = self.temperatures.len();
        Ok(ScanGrid {
            temperatures: self.temperatures.clone(),
            squeezings: self.squeezings.clone(),
            avg_gamma: (0..nt).map(|i| column(|r| &r.avg_gamma, i)).collect(),
            avg_b: (0..nt).map(|i| column(|r| &r.avg_b, i)).collect(),
            max_indicator: rows.iter().map(|r| r.max_indicator).fold(0.0, f64::max),
            bath: self.fingerprint,
            unobserved_size: self.unobserved.len(),
            observed_size: self.observed.len(),
            tau: self.tau,
            n_samples: self.n_samples,
        })
    }
}

/// Sequential (T, r) scan. See `qbm-sbs-cli` for the parallel driver.
pub fn scan_tr(
    bath: &BathSpec,
    system: &SystemSpec,
    units: &UnitContext,
    partition: &Partition,
    temperatures: &Axis,
    squeezings: &Axis,
    window: Option<(f64, usize)>,
) -> Result<ScanGrid> {
    let plan = ScanPlan::new(bath, system, units, partition, temperatures, squeezings, window)?;
    let rows = (0..plan.n_rows()).map(|j| plan.row(j)).collect();
    plan.assemble(rows)
}
