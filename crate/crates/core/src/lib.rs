//! Decoherence and distinguishability factors for a massive central oscillator
//! linearly coupled to a finite bath of harmonic oscillators with random
//! frequencies.
//!
//! Three regimes are covered:
//!
//! * [`qml`]: the measurement limit, where only the interaction term is kept
//!   and both factors decay as Gaussians in time;
//! * [`pqml`]: the bath self-Hamiltonians are kept, the factors become almost
//!   periodic and their infinite-time averages are products of `e^{-a} I0(a)`;
//! * [`full`]: the complete model including the central oscillator frequency,
//!   with optional squeezing of the thermal bath state.
//!
//! [`sbs`] turns factor values into broadcast-structure verdicts, formation
//! times and scaling studies, and [`scan`] runs the (temperature, squeezing)
//! grid of time-averaged factors.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel scan execution live in the `qbm-sbs-cli` crate.

#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod average;
pub mod bath;
mod error;
pub mod full;
pub mod pqml;
pub mod qml;
pub mod sbs;
pub mod scan;
pub mod selftest;
pub mod specfun;
pub mod sum;

pub use bath::{BathOrigin, BathSpec, EnvInitState, Partition, Scenario, SystemSpec, UnitContext};
pub use error::{Error, Result};

/// Which of the two factors a computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Factor {
    /// `|Γ|`, traced-out fraction, thermal weight `coth`.
    Decoherence,
    /// `B`, observed macrofraction, thermal weight `tanh`.
    Distinguishability,
}
