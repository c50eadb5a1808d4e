//! Run configuration: a single JSON document, every field optional.

use std::path::{Path, PathBuf};

use qbm_sbs::bath::{make_partition, BathSampling, CouplingPrefactor};
use qbm_sbs::scan::Axis;
use qbm_sbs::{BathSpec, EnvInitState, Partition, SystemSpec, UnitContext};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Qml,
    Pqml,
    #[default]
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub regime: Regime,
    pub bath: BathConfig,
    pub system: SystemConfig,
    pub env: EnvConfig,
    pub partition: PartitionConfig,
    pub qml: QmlConfig,
    pub run: RunSection,
    pub units: UnitsConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            regime: Regime::Full,
            bath: BathConfig::default(),
            system: SystemConfig::default(),
            env: EnvConfig::default(),
            partition: PartitionConfig::default(),
            qml: QmlConfig::default(),
            run: RunSection::default(),
            units: UnitsConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Central oscillator `[kg, 1/s]` and the two probed positions `[m]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub mass: f64,
    pub omega: f64,
    pub x1: f64,
    pub x2: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            mass: 1e-5,
            omega: 3e8,
            x1: 0.0,
            x2: 1e-9,
        }
    }
}

impl From<SystemConfig> for SystemSpec {
    fn from(c: SystemConfig) -> Self {
        SystemSpec {
            mass: c.mass,
            omega: c.omega,
            x1: c.x1,
            x2: c.x2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    /// Kelvin.
    pub temperature: f64,
    pub squeezing: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            temperature: 1.0,
            squeezing: 0.0,
        }
    }
}

impl From<EnvConfig> for EnvInitState {
    fn from(c: EnvConfig) -> Self {
        EnvInitState::squeezed(c.temperature, c.squeezing)
    }
}

/// SI by default; set both to 1 for dimensionless studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnitsConfig {
    pub hbar: f64,
    pub k_boltzmann: f64,
}

impl Default for UnitsConfig {
    fn default() -> Self {
        UnitsConfig {
            hbar: UnitContext::SI.hbar,
            k_boltzmann: UnitContext::SI.k_boltzmann,
        }
    }
}

impl From<UnitsConfig> for UnitContext {
    fn from(c: UnitsConfig) -> Self {
        UnitContext {
            hbar: c.hbar,
            k_boltzmann: c.k_boltzmann,
        }
    }
}

/// A sampled bath, or an explicit one when `explicit` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BathConfig {
    pub n: usize,
    pub omega_bar: f64,
    pub delta: f64,
    pub seed: u64,
    pub mass: f64,
    /// 1 or 2.
    pub coupling_prefactor: u8,
    pub gamma0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explicit: Option<BathSpec>,
}

impl Default for BathConfig {
    fn default() -> Self {
        BathConfig {
            n: 20,
            omega_bar: 4.5e9,
            delta: 3e9,
            seed: 1,
            mass: 1.0,
            coupling_prefactor: 2,
            gamma0: 0.33e18,
            explicit: None,
        }
    }
}

/// Contiguous split: the first `unobserved` oscillators are traced out, the
/// macrofractions follow in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PartitionConfig {
    pub unobserved: usize,
    pub macrofractions: Vec<usize>,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            unobserved: 10,
            macrofractions: vec![10],
        }
    }
}

/// The measurement limit works with a dimensionless inverse temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QmlConfig {
    pub beta: f64,
    /// Derive `beta = ħ·(1 s⁻¹)/(k_B T)` from `env.temperature` instead.
    pub physical_units: bool,
}

impl Default for QmlConfig {
    fn default() -> Self {
        QmlConfig {
            beta: 1.0,
            physical_units: false,
        }
    }
}

impl QmlConfig {
    pub fn effective_beta(&self, units: &UnitContext, temperature: f64) -> f64 {
        if self.physical_units {
            units.hbar / (units.k_boltzmann * temperature)
        } else {
            self.beta
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Explicit sample times; overrides `t_max`/`t_steps`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    pub t_steps: usize,
    /// Averaging window; defaults to 10⁴ periods of the slowest oscillator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    pub epsilon: f64,
    pub temperatures: Axis,
    pub squeezings: Axis,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            times: None,
            t_max: None,
            t_steps: 1000,
            tau: None,
            n_samples: None,
            epsilon: qbm_sbs::sbs::DEFAULT_EPSILON,
            temperatures: Axis::Range {
                min: 1e-3,
                max: 10.0,
                points: 9,
                log: true,
            },
            squeezings: Axis::Values {
                values: vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// CSV path; the JSON sidecar goes next to it with a `.json` extension.
    pub path: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            path: PathBuf::from("qbm-sbs.csv"),
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub epsilon: Option<f64>,
    pub temperature: Option<f64>,
    pub squeezing: Option<f64>,
    pub beta: Option<f64>,
    pub t_max: Option<f64>,
    pub t_steps: Option<usize>,
    pub tau: Option<f64>,
    pub n_samples: Option<usize>,
    pub unobserved: Option<usize>,
    pub mac: Option<Vec<usize>>,
}

fn config_error(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {reason}"))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        fn set<T>(dst: &mut Option<T>, src: Option<T>) {
            if src.is_some() {
                *dst = src;
            }
        }
        if let Some(seed) = o.seed {
            self.bath.seed = seed;
        }
        if let Some(out) = &o.out {
            self.output.path = out.clone();
        }
        if let Some(eps) = o.epsilon {
            self.run.epsilon = eps;
        }
        if let Some(temp) = o.temperature {
            self.env.temperature = temp;
        }
        if let Some(r) = o.squeezing {
            self.env.squeezing = r;
        }
        if let Some(beta) = o.beta {
            self.qml.beta = beta;
            self.qml.physical_units = false;
        }
        set(&mut self.run.t_max, o.t_max);
        if let Some(steps) = o.t_steps {
            self.run.t_steps = steps;
        }
        set(&mut self.run.tau, o.tau);
        set(&mut self.run.n_samples, o.n_samples);
        if let Some(u) = o.unobserved {
            self.partition.unobserved = u;
        }
        if let Some(mac) = &o.mac {
            self.partition.macrofractions = mac.clone();
        }
    }

    /// Checks that do not need the bath to be built.
    pub fn validate(&self) -> Result<(), CliError> {
        self.units().validate()?;
        self.system().validate()?;
        self.env().validate()?;
        if !(self.run.epsilon > 0.0 && self.run.epsilon < 1.0) {
            return Err(config_error("run.epsilon", "must lie in (0, 1)"));
        }
        if self.run.t_steps == 0 {
            return Err(config_error("run.t_steps", "must be at least one"));
        }
        if let Some(t) = self.run.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(config_error("run.t_max", "must be positive and finite"));
            }
        }
        if let Some(times) = &self.run.times {
            if times.is_empty() || times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
                return Err(config_error("run.times", "must be a non-empty list of non-negative times"));
            }
        }
        if let Some(tau) = self.run.tau {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(config_error("run.tau", "must be positive and finite"));
            }
        }
        if !(self.qml.beta > 0.0 && self.qml.beta.is_finite()) {
            return Err(config_error("qml.beta", "must be positive and finite"));
        }
        if self.partition.macrofractions.is_empty() {
            return Err(config_error("partition.macrofractions", "at least one macrofraction is required"));
        }
        Ok(())
    }

    pub fn system(&self) -> SystemSpec {
        self.system.into()
    }

    pub fn env(&self) -> EnvInitState {
        self.env.into()
    }

    pub fn units(&self) -> UnitContext {
        self.units.into()
    }

    pub fn build_bath(&self) -> Result<BathSpec, CliError> {
        if let Some(bath) = &self.bath.explicit {
            return Ok(bath.clone());
        }
        let b = &self.bath;
        let prefactor = CouplingPrefactor::try_from(b.coupling_prefactor)
            .map_err(|_| config_error("bath.coupling_prefactor", "must be 1 or 2"))?;
        let sampling = BathSampling {
            n: b.n,
            omega_bar: b.omega_bar,
            delta: b.delta,
            seed: b.seed,
            mass: b.mass,
            gamma0: b.gamma0,
            prefactor,
        };
        Ok(sampling.build(self.system.mass)?)
    }

    pub fn build_partition(&self, bath_size: usize) -> Result<Partition, CliError> {
        let p = &self.partition;
        let total = p.unobserved + p.macrofractions.iter().sum::<usize>();
        if total > bath_size {
            return Err(config_error(
                "partition",
                format_args!("needs {total} oscillators but the bath has {bath_size}"),
            ));
        }
        Ok(make_partition(bath_size, p.unobserved, &p.macrofractions)?)
    }

    pub fn sidecar_path(&self) -> PathBuf {
        self.output.path.with_extension("json")
    }
}
