//! Analytic theory of a phase-insensitive linear quantum amplifier switched
//! smoothly from damping to amplification, together with an independent
//! truncated-Fock master-equation integrator used to verify it.
//!
//! All formulas work in dimensionless time `tau = epsilon * t`; physical
//! rates are converted once in [`AmplifierParams::from_rates`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplifier;
pub mod error;
pub mod export;
pub mod field;
pub mod noise;
pub mod oracle;
pub mod phase_space;
pub mod quadrature;
pub mod rk4;
pub mod special;
pub mod thermal;

pub use amplifier::{AmplifierParams, CoefficientProfile, ConstantRates};
pub use error::{Error, Result};
pub use export::TimeSeries;
pub use field::{InputField, MomentSet};
pub use noise::NoiseRecord;
pub use phase_space::{CharFn, GridSpec, PhaseSpaceGrid, QuasiOrder};
pub use thermal::{ThermalState, UnitMode};

pub use num_complex::Complex64;
