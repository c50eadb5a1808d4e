//! Bath, central system, initial state and partition types.
//!
//! All quantities are SI. Exponents in the factor formulas are formed as
//! `(action) / ħ` and thermal arguments as `ħω / (2 k_B T)`, with both
//! constants carried in [`UnitContext`] so that dimensionless studies can set
//! them to one.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Factor, Result};

/// Physical constants used to make exponents dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct UnitContext {
    /// Reduced Planck constant [J s].
    pub hbar: f64,
    /// Boltzmann constant [J/K].
    pub k_boltzmann: f64,
}

impl UnitContext {
    pub const SI: UnitContext = UnitContext {
        hbar: 1.054_571_817e-34,
        k_boltzmann: 1.380_649e-23,
    };

    /// `ħ = k_B = 1`.
    pub const NATURAL: UnitContext = UnitContext {
        hbar: 1.0,
        k_boltzmann: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::invalid("hbar", "must be positive and finite"));
        }
        if !(self.k_boltzmann > 0.0 && self.k_boltzmann.is_finite()) {
            return Err(Error::invalid("k_boltzmann", "must be positive and finite"));
        }
        Ok(())
    }

    /// `ħω / (2 k_B T)`.
    #[inline]
    pub fn thermal_arg(&self, omega: f64, temperature: f64) -> f64 {
        self.hbar * omega / (2.0 * self.k_boltzmann * temperature)
    }

    /// `coth(ħω/2k_BT)` for [`Factor::Decoherence`], `tanh(ħω/2k_BT)` for
    /// [`Factor::Distinguishability`].
    #[inline]
    pub fn thermal_weight(&self, factor: Factor, omega: f64, temperature: f64) -> f64 {
        thermal_weight(factor, self.thermal_arg(omega, temperature))
    }
}

impl Default for UnitContext {
    fn default() -> Self {
        UnitContext::SI
    }
}

/// `coth(x)` or `tanh(x)` depending on the factor.
#[inline]
pub fn thermal_weight(factor: Factor, x: f64) -> f64 {
    match factor {
        Factor::Decoherence => 1.0 / x.tanh(),
        Factor::Distinguishability => x.tanh(),
    }
}

/// Where a sampled bath came from.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BathOrigin {
    pub seed: u64,
    pub omega_bar: f64,
    pub delta: f64,
}

#[cfg_attr(feature = "serde", derive(serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
struct RawBath {
    omegas: Vec<f64>,
    masses: Vec<f64>,
    couplings: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(default))]
    origin: Option<BathOrigin>,
}

/// The environmental oscillators: frequencies [1/s], masses [kg] and coupling
/// constants [kg/s²].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawBath"))]
pub struct BathSpec {
    omegas: Vec<f64>,
    masses: Vec<f64>,
    couplings: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    origin: Option<BathOrigin>,
}

impl TryFrom<RawBath> for BathSpec {
    type Error = Error;

    fn try_from(raw: RawBath) -> Result<Self> {
        let mut bath = BathSpec::new(raw.omegas, raw.masses, raw.couplings)?;
        bath.origin = raw.origin;
        Ok(bath)
    }
}

impl BathSpec {
    pub fn new(omegas: Vec<f64>, masses: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if masses.len() != omegas.len() {
            return Err(Error::invalid("masses", "length differs from omegas"));
        }
        if couplings.len() != omegas.len() {
            return Err(Error::invalid("couplings", "length differs from omegas"));
        }
        let positive = |xs: &[f64]| xs.iter().all(|&x| x > 0.0 && x.is_finite());
        if !positive(&omegas) {
            return Err(Error::invalid("omegas", "entries must be positive and finite"));
        }
        if !positive(&masses) {
            return Err(Error::invalid("masses", "entries must be positive and finite"));
        }
        if !positive(&couplings) {
            return Err(Error::invalid("couplings", "entries must be positive and finite"));
        }
        Ok(BathSpec {
            omegas,
            masses,
            couplings,
            origin: None,
        })
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn origin(&self) -> Option<BathOrigin> {
        self.origin
    }

    /// Sub-bath holding the oscillators in `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Result<BathSpec> {
        self.check_indices(idx)?;
        Ok(BathSpec {
            omegas: idx.iter().map(|&k| self.omegas[k]).collect(),
            masses: idx.iter().map(|&k| self.masses[k]).collect(),
            couplings: idx.iter().map(|&k| self.couplings[k]).collect(),
            origin: None,
        })
    }

    pub fn check_indices(&self, idx: &[usize]) -> Result<()> {
        match idx.iter().find(|&&k| k >= self.len()) {
            Some(&index) => Err(Error::IndexOutOfRange {
                index,
                n: self.len(),
            }),
            None => Ok(()),
        }
    }

    /// Smallest and largest frequency in `idx` (whole bath when `idx` is empty).
    pub fn frequency_span(&self, idx: &[usize]) -> (f64, f64) {
        let init = (f64::INFINITY, f64::NEG_INFINITY);
        let widen = |(lo, hi): (f64, f64), w: f64| (lo.min(w), hi.max(w));
        if idx.is_empty() {
            self.omegas.iter().copied().fold(init, widen)
        } else {
            idx.iter().map(|&k| self.omegas[k]).fold(init, widen)
        }
    }
}

/// Coupling-constant prefactor in `C_k = p √(M m_k γ̃₀ / π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingPrefactor {
    One,
    Two,
}

impl CouplingPrefactor {
    pub fn value(self) -> f64 {
        match self {
            CouplingPrefactor::One => 1.0,
            CouplingPrefactor::Two => 2.0,
        }
    }
}

impl TryFrom<u8> for CouplingPrefactor {
    type Error = Error;

    fn try_from(p: u8) -> Result<Self> {
        match p {
            1 => Ok(CouplingPrefactor::One),
            2 => Ok(CouplingPrefactor::Two),
            _ => Err(Error::invalid("coupling_prefactor", "must be 1 or 2")),
        }
    }
}

/// Parameters of a randomly sampled bath with mass-proportional couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSampling {
    pub n: usize,
    pub omega_bar: f64,
    pub delta: f64,
    pub seed: u64,
    /// Common oscillator mass. It cancels from every factor because
    /// `C_k² / m_k` does not depend on `m_k`.
    pub mass: f64,
    pub gamma0: f64,
    pub prefactor: CouplingPrefactor,
}

impl BathSampling {
    pub fn build(&self, system_mass: f64) -> Result<BathSpec> {
        let omegas = sample_frequencies(self.n, self.omega_bar, self.delta, self.seed)?;
        let masses = alloc::vec![self.mass; self.n];
        let couplings = couplings_from_masses(&masses, system_mass, self.gamma0, self.prefactor)?;
        let mut bath = BathSpec::new(omegas, masses, couplings)?;
        bath.origin = Some(BathOrigin {
            seed: self.seed,
            omega_bar: self.omega_bar,
            delta: self.delta,
        });
        Ok(bath)
    }
}

/// `n` i.i.d. frequencies uniform on `[ω̄ - Δ/2, ω̄ + Δ/2]`.
pub fn sample_frequencies(n: usize, omega_bar: f64, delta: f64, seed: u64) -> Result<Vec<f64>> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::invalid("delta", "must be non-negative and finite"));
    }
    if !(omega_bar - delta / 2.0 > 0.0 && omega_bar.is_finite()) {
        return Err(Error::invalid("omega_bar", "lower band edge must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| omega_bar + delta * (rng.gen::<f64>() - 0.5))
        .collect())
}

/// Seed for the `index`-th independent draw under a master seed (SplitMix64
/// finaliser over both words).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `C_k = p √(M m_k γ̃₀ / π)`.
pub fn couplings_from_masses(
    masses: &[f64],
    mass_big: f64,
    gamma0: f64,
    prefactor: CouplingPrefactor,
) -> Result<Vec<f64>> {
    if !(mass_big > 0.0) {
        return Err(Error::invalid("mass", "system mass must be positive"));
    }
    if !(gamma0 > 0.0) {
        return Err(Error::invalid("gamma0", "must be positive"));
    }
    if masses.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::invalid("masses", "entries must be positive"));
    }
    let p = prefactor.value();
    Ok(masses
        .iter()
        .map(|&m| p * (mass_big * m * gamma0 / core::f64::consts::PI).sqrt())
        .collect())
}

/// True iff every `ω_k ≥ margin Ω` or `ω_k ≤ Ω / margin`.
pub fn validate_offresonance(omegas: &[f64], omega_big: f64, margin: f64) -> Result<bool> {
    if !(margin > 1.0) {
        return Err(Error::invalid("margin", "must exceed 1"));
    }
    Ok(omegas
        .iter()
        .all(|&w| w >= margin * omega_big || w <= omega_big / margin))
}

/// The central oscillator and the two positions whose superposition is probed.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SystemSpec {
    /// `M` [kg].
    pub mass: f64,
    /// `Ω` [1/s]; zero selects the partial measurement limit.
    pub omega: f64,
    pub x1: f64,
    pub x2: f64,
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::invalid("system.mass", "must be positive and finite"));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(Error::invalid("system.omega", "must be non-negative and finite"));
        }
        if !(self.x1.is_finite() && self.x2.is_finite()) {
            return Err(Error::invalid("system.x1", "positions must be finite"));
        }
        Ok(())
    }

    /// `|X - X'|`.
    pub fn separation(&self) -> f64 {
        (self.x1 - self.x2).abs()
    }

    /// `(X - X')²`.
    pub fn separation_sq(&self) -> f64 {
        let d = self.x1 - self.x2;
        d * d
    }
}

/// Squeezed thermal initial state of every bath oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct EnvInitState {
    /// `T` [K].
    pub temperature: f64,
    /// Squeezing parameter `r`; zero for a plain thermal state.
    #[cfg_attr(feature = "serde", serde(default))]
    pub squeezing: f64,
}

impl EnvInitState {
    pub fn thermal(temperature: f64) -> Self {
        EnvInitState {
            temperature,
            squeezing: 0.0,
        }
    }

    pub fn squeezed(temperature: f64, squeezing: f64) -> Self {
        EnvInitState {
            temperature,
            squeezing,
        }
    }

    /// Thermal state at inverse temperature `β = 1/(k_B T)`.
    pub fn from_beta(beta: f64, units: &UnitContext) -> Self {
        EnvInitState::thermal(1.0 / (units.k_boltzmann * beta))
    }

    pub fn beta(&self, units: &UnitContext) -> f64 {
        1.0 / (units.k_boltzmann * self.temperature)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid("env.temperature", "must be positive and finite"));
        }
        if !self.squeezing.is_finite() {
            return Err(Error::invalid("env.squeezing", "must be finite"));
        }
        Ok(())
    }
}

#[cfg_attr(feature = "serde", derive(serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
struct RawPartition {
    n: usize,
    unobserved: Vec<usize>,
    macrofractions: Vec<Vec<usize>>,
}

/// Split of the bath into the traced-out fraction and observed macrofractions.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawPartition"))]
pub struct Partition {
    n: usize,
    unobserved: Vec<usize>,
    macrofractions: Vec<Vec<usize>>,
}

impl TryFrom<RawPartition> for Partition {
    type Error = Error;

    fn try_from(raw: RawPartition) -> Result<Self> {
        Partition::new(raw.n, raw.unobserved, raw.macrofractions)
    }
}

impl Partition {
    /// Index sets must lie in `[0, n)`, be pairwise disjoint, and every
    /// macrofraction must be non-empty.
    pub fn new(n: usize, unobserved: Vec<usize>, macrofractions: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = alloc::vec![false; n];
        for &k in unobserved.iter().chain(macrofractions.iter().flatten()) {
            if k >= n {
                return Err(Error::IndexOutOfRange { index: k, n });
            }
            if core::mem::replace(&mut seen[k], true) {
                return Err(Error::invalid("partition", "index sets overlap"));
            }
        }
        if macrofractions.iter().any(Vec::is_empty) {
            return Err(Error::invalid("partition", "macrofractions must be non-empty"));
        }
        Ok(Partition {
            n,
            unobserved,
            macrofractions,
        })
    }

    pub fn bath_size(&self) -> usize {
        self.n
    }

    pub fn unobserved(&self) -> &[usize] {
        &self.unobserved
    }

    pub fn macrofractions(&self) -> &[Vec<usize>] {
        &self.macrofractions
    }

    /// The first observed macrofraction, used for `B`.
    pub fn first_macrofraction(&self) -> Option<&[usize]> {
        self.macrofractions.first().map(Vec::as_slice)
    }
}

/// Contiguous partition: the first `unobserved_size` indices are traced out,
/// followed by the macrofractions in order.
pub fn make_partition(n: usize, unobserved_size: usize, mac_sizes: &[usize]) -> Result<Partition> {
    let total = mac_sizes
        .iter()
        .try_fold(unobserved_size, |acc, &s| acc.checked_add(s));
    if total.is_none_or(|t| t > n) {
        return Err(Error::invalid("partition", "more indices requested than oscillators"));
    }
    let unobserved = (0..unobserved_size).collect();
    let mut start = unobserved_size;
    let macrofractions = mac_sizes
        .iter()
        .map(|&s| {
            let set = (start..start + s).collect();
            start += s;
            set
        })
        .collect();
    Partition::new(n, unobserved, macrofractions)
}

/// Everything needed to evaluate a factor except the time and the index set.
#[derive(Debug, Clone, Copy)]
pub struct Scenario<'a> {
    pub bath: &'a BathSpec,
    pub system: SystemSpec,
    pub env: EnvInitState,
    pub units: UnitContext,
}

impl<'a> Scenario<'a> {
    pub fn new(bath: &'a BathSpec, system: SystemSpec, env: EnvInitState, units: UnitContext) -> Self {
        Scenario {
            bath,
            system,
            env,
            units,
        }
    }

    pub fn with_env(self, env: EnvInitState) -> Self {
        Scenario { env, ..self }
    }

    pub fn validate(&self, idx: &[usize]) -> Result<()> {
        self.system.validate()?;
        self.env.validate()?;
        self.units.validate()?;
        self.bath.check_indices(idx)
    }
}
