//! Departure from thermal equilibrium: effective temperature and von Neumann
//! entropy of an amplified thermal state.

use serde::{Deserialize, Serialize};

use crate::amplifier::AmplifierParams;
use crate::field::{FieldStats, InputField};
use crate::special::bose_occupation;
use crate::{Error, Result};

/// Reduced Planck constant over Boltzmann constant, K s.
pub const HBAR_OVER_KB: f64 = 1.054_571_817e-34 / 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitMode {
    /// `k_B = hbar = 1`, temperatures in units of `hbar omega0 / k_B`.
    Dimensionless,
    /// Kelvin; needs the field angular frequency in s^-1.
    Kelvin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub nbar_in: f64,
    pub omega0: Option<f64>,
    pub unit_mode: UnitMode,
}

impl ThermalState {
    pub fn dimensionless(nbar_in: f64) -> Result<Self> {
        let s = Self {
            nbar_in,
            omega0: None,
            unit_mode: UnitMode::Dimensionless,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn kelvin(nbar_in: f64, omega0: f64) -> Result<Self> {
        let s = Self {
            nbar_in,
            omega0: Some(omega0),
            unit_mode: UnitMode::Kelvin,
        };
        s.validate()?;
        Ok(s)
    }

    /// Thermal state of the given temperature (in the units of `unit_mode`).
    pub fn from_temperature(temperature: f64, omega0: Option<f64>, unit_mode: UnitMode) -> Result<Self> {
        let probe = Self {
            nbar_in: 0.0,
            omega0,
            unit_mode,
        };
        probe.validate()?;
        if !(temperature > 0.0) {
            return Err(Error::InvalidParameter {
                name: "temperature",
                value: temperature,
                reason: "must be positive",
            });
        }
        Ok(Self {
            nbar_in: bose_occupation(probe.temperature_scale() / temperature),
            ..probe
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nbar_in >= 0.0) || !self.nbar_in.is_finite() {
            return Err(Error::InvalidParameter {
                name: "nbar_in",
                value: self.nbar_in,
                reason: "must be finite and non-negative",
            });
        }
        if self.unit_mode == UnitMode::Kelvin {
            match self.omega0 {
                Some(w) if w > 0.0 && w.is_finite() => {}
                other => {
                    return Err(Error::InvalidParameter {
                        name: "omega0",
                        value: other.unwrap_or(f64::NAN),
                        reason: "kelvin output needs a positive field frequency",
                    })
                }
            }
        }
        Ok(())
    }

    /// `hbar omega0 / k_B` in the active units.
    pub fn temperature_scale(&self) -> f64 {
        match self.unit_mode {
            UnitMode::Dimensionless => 1.0,
            UnitMode::Kelvin => HBAR_OVER_KB * self.omega0.unwrap_or(f64::NAN),
        }
    }

    pub fn input(&self) -> InputField {
        InputField::thermal(self.nbar_in)
    }

    /// Temperature of a thermal mode with mean occupation `n`.
    pub fn temperature_of(&self, n: f64) -> Result<f64> {
        temperature_from_occupation(n).map(|t| t * self.temperature_scale())
    }

    /// Occupation of a thermal mode at temperature `t`.
    pub fn occupation_of(&self, t: f64) -> f64 {
        bose_occupation(self.temperature_scale() / t)
    }
}

/// `T / (hbar omega0 / k_B) = 1 / [ln(n + 1) - ln n]`.
pub fn temperature_from_occupation(n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::TemperatureUndefined);
    }
    Ok(1.0 / (1.0 / n).ln_1p())
}

/// `S / k_B = (n + 1) ln(n + 1) - n ln n`, with `0 ln 0 = 0`.
pub fn entropy_from_occupation(n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    (n + 1.0) * n.ln_1p() - n * n.ln()
}

/// One sample of the thermal departure time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalRecord {
    pub tau: f64,
    pub mean_n: f64,
    pub temperature: f64,
    pub entropy: f64,
    pub population_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ThermalTrack {
    stats: FieldStats,
    state: ThermalState,
}

impl ThermalTrack {
    pub fn new(params: AmplifierParams, state: ThermalState) -> Result<Self> {
        state.validate()?;
        Ok(Self {
            stats: FieldStats::new(params)?,
            state,
        })
    }

    pub fn state(&self) -> &ThermalState {
        &self.state
    }

    pub fn mean_n(&self, tau: f64) -> Result<f64> {
        self.stats.mean_photon_number(&self.state.input(), tau)
    }

    pub fn temperature(&self, tau: f64) -> Result<f64> {
        self.state.temperature_of(self.mean_n(tau)?)
    }

    pub fn entropy(&self, tau: f64) -> Result<f64> {
        Ok(entropy_from_occupation(self.mean_n(tau)?))
    }

    pub fn record(&self, tau: f64) -> Result<ThermalRecord> {
        let mean_n = self.mean_n(tau)?;
        Ok(ThermalRecord {
            tau,
            mean_n,
            temperature: self.state.temperature_of(mean_n)?,
            entropy: entropy_from_occupation(mean_n),
            population_ratio: self.stats.params().population_ratio(tau),
        })
    }

    /// Late-time entropy increase rate `[S(14) - S(10)] / 4`.
    pub fn entropy_slope(&self) -> Result<f64> {
        Ok((self.entropy(14.0)? - self.entropy(10.0)?) / 4.0)
    }
}

pub fn temperature(params: &AmplifierParams, state: &ThermalState, tau: f64) -> Result<f64> {
    ThermalTrack::new(*params, *state)?.temperature(tau)
}

pub fn entropy(params: &AmplifierParams, state: &ThermalState, tau: f64) -> Result<f64> {
    ThermalTrack::new(*params, *state)?.entropy(tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_from_occupation(0.0), 0.0);
        assert!((entropy_from_occupation(1.0) - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn temperature_examples() {
        assert!((temperature_from_occupation(1.0).unwrap() - 1.0 / std::f64::consts::LN_2).abs() < 1e-15);
        assert!(matches!(
            temperature_from_occupation(0.0),
            Err(Error::TemperatureUndefined)
        ));
    }

    #[test]
    fn initial_temperature_is_recovered() {
        let state = ThermalState::from_temperature(2.5e5, Some(1e14), UnitMode::Kelvin).unwrap();
        let p = AmplifierParams::from_occupation(0.05, 1e3, 8.0).unwrap();
        let t0 = temperature(&p, &state, 0.0).unwrap();
        assert!((t0 - 2.5e5).abs() < 1e-9 * 2.5e5);
    }

    #[test]
    fn occupation_temperature_round_trip() {
        let state = ThermalState::dimensionless(0.0).unwrap();
        for &n in &[1e-6, 0.3, 1.0, 17.0, 1e3] {
            let t = state.temperature_of(n).unwrap();
            assert!((state.occupation_of(t) - n).abs() < 1e-10 * n);
            // 2n + 1 = coth(1 / 2T)
            assert!(((0.5 / t).tanh().recip() - (2.0 * n + 1.0)).abs() < 1e-10 * (2.0 * n + 1.0));
        }
    }

    #[test]
    fn kelvin_needs_frequency() {
        assert!(ThermalState {
            nbar_in: 1.0,
            omega0: None,
            unit_mode: UnitMode::Kelvin
        }
        .validate()
        .is_err());
        let s = ThermalState::kelvin(1.0, 1e14).unwrap();
        assert!((s.temperature_scale() - 763.823_3).abs() < 1e-3);
    }
}
