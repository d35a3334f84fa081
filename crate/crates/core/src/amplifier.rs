//! Amplifier parameterization and the elementary time-dependent functions:
//! gain/loss coefficients, gain factor, gain and the atomic population ratio.

use serde::{Deserialize, Serialize};

use crate::special::{log_cosh, logistic};
use crate::{Error, Result};

/// Time-dependent gain and loss coefficients of a phase-insensitive
/// amplifier master equation, in dimensionless time.
pub trait CoefficientProfile {
    /// Gain (pump) coefficient multiplying the `a^dagger` dissipator.
    fn gain_rate(&self, tau: f64) -> f64;
    /// Loss coefficient multiplying the `a` dissipator.
    fn loss_rate(&self, tau: f64) -> f64;
}

/// Dimensionless amplifier parameters.
///
/// `a_prime = A / epsilon` is the asymptotic gain factor in units of the onset
/// rate, `b_prime = B / epsilon` the thermal floor of both coefficients and
/// `tau0 = epsilon * t0` the inversion instant. `phase_rate = omega0 / epsilon`
/// only rotates the field phase; set it to zero to work in the frame rotating
/// at the field frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplifierParams {
    pub a_prime: f64,
    pub b_prime: f64,
    pub tau0: f64,
    #[serde(default)]
    pub phase_rate: f64,
}

impl AmplifierParams {
    pub fn new(a_prime: f64, b_prime: f64, tau0: f64) -> Result<Self> {
        let p = Self {
            a_prime,
            b_prime,
            tau0,
            phase_rate: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from the medium occupation `n_M = B / A`.
    pub fn from_occupation(a_prime: f64, n_medium: f64, tau0: f64) -> Result<Self> {
        if !(n_medium >= 0.0) || !n_medium.is_finite() {
            return Err(Error::InvalidParameter {
                name: "n_medium",
                value: n_medium,
                reason: "must be finite and non-negative",
            });
        }
        Self::new(a_prime, a_prime * n_medium, tau0)
    }

    /// Converts physical rates (all in the same inverse time unit) once.
    pub fn from_rates(a: f64, b: f64, epsilon: f64, t0: f64, omega0: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: epsilon,
                reason: "onset rate must be positive",
            });
        }
        let p = Self {
            a_prime: a / epsilon,
            b_prime: b / epsilon,
            tau0: epsilon * t0,
            phase_rate: omega0 / epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_phase_rate(mut self, phase_rate: f64) -> Self {
        self.phase_rate = phase_rate;
        self
    }

    /// Same parameters viewed in the frame rotating at the field frequency.
    pub fn rotating_frame(self) -> Self {
        self.with_phase_rate(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name, value: f64, ok: bool, reason| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value, reason })
            }
        };
        check("a_prime", self.a_prime, self.a_prime > 0.0, "must be positive")?;
        check("b_prime", self.b_prime, self.b_prime >= 0.0, "must be non-negative")?;
        check("tau0", self.tau0, self.tau0 >= 0.0, "must be non-negative")?;
        check("phase_rate", self.phase_rate, true, "must be finite")
    }

    /// Medium occupation `n_M = B / A`.
    pub fn n_medium(&self) -> f64 {
        self.b_prime / self.a_prime
    }

    /// `A' + 2B'`, the constant sum of the two coefficients.
    pub fn rate_sum(&self) -> f64 {
        self.a_prime + 2.0 * self.b_prime
    }

    /// Field phase accumulated by free evolution up to `tau`.
    pub fn phase(&self, tau: f64) -> f64 {
        self.phase_rate * tau
    }

    /// Gain coefficient `A'(tau)`.
    pub fn coeff_a(&self, tau: f64) -> f64 {
        self.a_prime * logistic(tau - self.tau0) + self.b_prime
    }

    /// Loss coefficient `C'(tau)`, the mirror image of `A'(tau)` about `tau0`.
    pub fn coeff_c(&self, tau: f64) -> f64 {
        self.a_prime * logistic(self.tau0 - tau) + self.b_prime
    }

    /// Gain factor `W(tau) = A' tanh(tau - tau0)`.
    pub fn gain_factor_w(&self, tau: f64) -> f64 {
        self.a_prime * (tau - self.tau0).tanh()
    }

    /// `ln G(tau) = A' [ln cosh(tau - tau0) - ln cosh(tau0)]`.
    pub fn log_gain(&self, tau: f64) -> Result<f64> {
        check_forward_time("gain", tau)?;
        Ok(self.a_prime * (log_cosh(tau - self.tau0) - log_cosh(self.tau0)))
    }

    /// Gain `G(tau) = [cosh(tau - tau0) / cosh(tau0)]^{A'}`, with `G(0) = 1`.
    pub fn gain(&self, tau: f64) -> Result<f64> {
        self.log_gain(tau).map(f64::exp)
    }

    /// Population ratio `N2/N1 = A'(tau) / C'(tau)`; `+inf` once `C'` underflows.
    pub fn population_ratio(&self, tau: f64) -> f64 {
        let c = self.coeff_c(tau);
        if c == 0.0 {
            f64::INFINITY
        } else {
            self.coeff_a(tau) / c
        }
    }
}

impl CoefficientProfile for AmplifierParams {
    fn gain_rate(&self, tau: f64) -> f64 {
        self.coeff_a(tau)
    }

    fn loss_rate(&self, tau: f64) -> f64 {
        self.coeff_c(tau)
    }
}

/// Constant coefficients: the standard amplifier (or attenuator) whose
/// inversion is reached instantaneously.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantRates {
    pub gain: f64,
    pub loss: f64,
}

impl ConstantRates {
    pub fn gain_factor(&self) -> f64 {
        self.gain - self.loss
    }

    /// `G = e^{W t}`.
    pub fn gain_at(&self, t: f64) -> f64 {
        (self.gain_factor() * t).exp()
    }

    /// Width of the spontaneous-emission field `m = A (G - 1) / W`.
    pub fn spontaneous_width(&self, t: f64) -> f64 {
        let w = self.gain_factor();
        if w == 0.0 {
            self.gain * t
        } else {
            self.gain * (self.gain_at(t) - 1.0) / w
        }
    }
}

impl CoefficientProfile for ConstantRates {
    fn gain_rate(&self, _tau: f64) -> f64 {
        self.gain
    }

    fn loss_rate(&self, _tau: f64) -> f64 {
        self.loss
    }
}

pub(crate) fn check_forward_time(what: &'static str, tau: f64) -> Result<()> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            domain: "finite tau >= 0",
            value: tau,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64, t0: f64) -> AmplifierParams {
        AmplifierParams::new(a, b, t0).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(AmplifierParams::new(0.0, 0.0, 1.0).is_err());
        assert!(AmplifierParams::new(1.0, -0.1, 1.0).is_err());
        assert!(AmplifierParams::new(1.0, 0.0, -1.0).is_err());
        assert!(AmplifierParams::new(f64::NAN, 0.0, 1.0).is_err());
        assert!(AmplifierParams::from_rates(1.0, 0.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn physical_rates_convert_to_dimensionless_values() {
        let p = AmplifierParams::from_rates(3.0, 0.6, 1.5, 2.0, 30.0).unwrap();
        assert_eq!(p.a_prime, 2.0);
        assert!((p.b_prime - 0.4).abs() < 1e-15);
        assert_eq!(p.tau0, 3.0);
        assert_eq!(p.phase_rate, 20.0);
        assert!((p.n_medium() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn coeff_a_examples() {
        assert_eq!(params(2.0, 0.0, 3.0).coeff_a(3.0), 1.0);
        assert_eq!(params(2.0, 0.5, 0.0).coeff_a(1.0e6), 2.5);
        // 1 / (1 + e^-2) evaluated independently in high precision.
        let v = params(1.0, 0.0, 0.0).coeff_a(1.0);
        assert!((v - 0.880_797_077_977_882_4).abs() < 1e-15);
    }

    #[test]
    fn coeff_c_examples_and_mirror_symmetry() {
        let p = params(2.0, 0.0, 4.0);
        assert_eq!(p.coeff_c(4.0), 1.0);
        assert_eq!(p.coeff_c(-1.0e6), 2.0);
        let q = params(1.3, 0.2, 2.5);
        for &tau in &[-3.0, 0.0, 1.0, 2.5, 7.0] {
            assert_eq!(q.coeff_c(tau), q.coeff_a(2.0 * q.tau0 - tau));
        }
    }

    #[test]
    fn extreme_times_do_not_overflow() {
        let p = params(1.0, 0.1, 0.0);
        for &tau in &[-1.0e4, -800.0, 800.0, 1.0e4] {
            assert!(p.coeff_a(tau).is_finite());
            assert!(p.coeff_c(tau).is_finite());
            assert!(p.gain(tau.abs()).unwrap() > 0.0 || tau.abs() > 700.0);
        }
        assert!(p.log_gain(1.0e4).unwrap().is_finite());
    }

    #[test]
    fn gain_factor_examples() {
        assert_eq!(params(0.7, 0.0, 2.0).gain_factor_w(2.0), 0.0);
        assert_eq!(params(0.5, 0.0, 0.0).gain_factor_w(100.0), 0.5);
        let w = params(2.0, 0.0, 5.0).gain_factor_w(4.0);
        assert!((w - (-1.523_188_311_911_529_8)).abs() < 1e-14);
    }

    #[test]
    fn gain_examples() {
        let p = params(2.0, 0.0, 0.0);
        assert!((p.gain(1.0).unwrap() - 2.381_097_845_541_816).abs() < 1e-12);
        let q = params(0.05, 0.0, 0.0);
        // mpmath: cosh(1)^0.05
        assert!((q.gain(1.0).unwrap() - 1.021_925_958_519_171_3).abs() < 1e-14);
        let r = params(3.0, 0.0, 4.0);
        assert!((r.gain(8.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.gain(0.0).unwrap(), 1.0);
        assert!(matches!(r.gain(-0.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn population_ratio_limits() {
        let p = AmplifierParams::from_occupation(1.0, 1.0e3, 4.0).unwrap();
        assert!((p.population_ratio(4.0) - 1.0).abs() < 1e-15);
        assert!((p.population_ratio(-100.0) - 1000.0 / 1001.0).abs() < 1e-12);
        assert!((p.population_ratio(100.0) - 1.001).abs() < 1e-12);
        let cold = params(1.0, 0.0, 0.0);
        assert_eq!(cold.population_ratio(1.0e4), f64::INFINITY);
    }

    #[test]
    fn constant_rates_reference_formulas() {
        let r = ConstantRates { gain: 1.5, loss: 0.5 };
        assert!((r.gain_at(2.0) - 2.0_f64.exp()).abs() < 1e-14);
        assert!((r.spontaneous_width(2.0) - 1.5 * (2.0_f64.exp() - 1.0)).abs() < 1e-13);
    }
}
