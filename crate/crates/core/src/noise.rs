//! Spontaneous-emission noise: the integral family `I_{A'}`, the noise
//! width `Delta(tau)`, the added noise and its limits.
//!
//! `I_{A'}(x) = int_0^x (cosh u)^{-A'} du` is normalized to vanish at the
//! origin, which makes it odd in `x`. With that normalization
//!
//! ```text
//! Delta(tau) = (A' + 2B')/2 * cosh(tau - tau0)^{A'} * [I(tau - tau0) + I(tau0)]
//! ```
//!
//! which is `G(tau) (A'+2B')/2 cosh(tau0)^{A'} [...]` with the gain folded
//! into a single power so nothing overflows before the final exponential.

use serde::{Deserialize, Serialize};

use crate::amplifier::{check_forward_time, AmplifierParams};
use crate::quadrature::{integrate, integrate_with_breaks, QuadratureOptions};
use crate::special::{double_factorial_ratio, gamma_ratio, log_cosh};
use crate::{Error, Result};

/// Below this exponent the asymptote `Gamma(A'/2)` is reported as infinite.
pub const ASYMPTOTE_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRecord {
    pub tau: f64,
    pub gain: f64,
    pub delta: f64,
    pub added_noise: f64,
    /// `m(tau) = (G - 1)/2 + Delta`. Never negative: it equals `G int G^-1 A'(s) ds`.
    pub m_width: f64,
}

fn check_exponent(aprime: f64) -> Result<()> {
    if aprime > 0.0 && aprime.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "a_prime",
            value: aprime,
            reason: "exponent must be positive and finite",
        })
    }
}

/// `I_{A'}(x)` by adaptive quadrature.
pub fn integral_i_with(aprime: f64, x: f64, opts: &QuadratureOptions) -> Result<f64> {
    check_exponent(aprime)?;
    if !x.is_finite() {
        return Err(Error::Domain {
            what: "I_{A'}(x)",
            domain: "finite x",
            value: x,
        });
    }
    if x < 0.0 {
        return integral_i_with(aprime, -x, opts).map(|v| -v);
    }
    integrate(|u| (-aprime * log_cosh(u)).exp(), 0.0, x, opts)
}

pub fn integral_i(aprime: f64, x: f64) -> Result<f64> {
    integral_i_with(aprime, x, &QuadratureOptions::default())
}

/// `I_1(x)`: the Gudermannian, `2 atan(e^x) - pi/2`.
pub fn integral_i_one(x: f64) -> f64 {
    crate::special::gudermannian(x)
}

fn check_order(m: u32) -> Result<()> {
    if m == 0 {
        Err(Error::InvalidParameter {
            name: "m",
            value: 0.0,
            reason: "closed forms need m >= 1",
        })
    } else {
        Ok(())
    }
}

/// Closed form of `I_{2m}(x)` for integer exponents.
///
/// The printed sum `sinh x / cosh^{2m-1} x * [1 + sum_k c_k cosh^{2k} x]` is
/// evaluated as `tanh x * sum_k c_k sech^{2(m-1-k)} x` so large `|x|` cannot
/// overflow. `c_k = Gamma(m) Gamma(m-k-1/2) / (Gamma(m-k) Gamma(m-1/2))`,
/// generated by `c_k = c_{k-1} (m-k) / (m-k-1/2)`.
pub fn integral_i_closed_even(m: u32, x: f64) -> Result<f64> {
    check_order(m)?;
    let t = x.tanh();
    let sech = 1.0 / x.cosh();
    let mf = m as f64;
    let mut coeff = 1.0;
    let mut sum = sech.powi(2 * (m as i32 - 1));
    for k in 1..m {
        let kf = k as f64;
        coeff *= (mf - kf) / (mf - kf - 0.5);
        sum += coeff * sech.powi(2 * (m - 1 - k) as i32);
    }
    Ok(t * sum / (2.0 * mf - 1.0))
}

/// Closed form of `I_{2m+1}(x)` for integer exponents.
///
/// Rational part `tanh x * sum_k d_k sech^{2(m-k)-1} x / (2m)` with
/// `d_k = Gamma(m-k) Gamma(m+1/2) / (Gamma(m) Gamma(m-k+1/2))`, plus
/// `(2m-1)!!/(2m)!! * atan(sinh x)`.
pub fn integral_i_closed_odd(m: u32, x: f64) -> Result<f64> {
    check_order(m)?;
    let t = x.tanh();
    let sech = 1.0 / x.cosh();
    let mf = m as f64;
    let mut coeff = 1.0;
    let mut sum = sech.powi(2 * m as i32 - 1);
    for k in 1..m {
        let kf = k as f64;
        coeff *= (mf - kf + 0.5) / (mf - kf);
        sum += coeff * sech.powi(2 * (m - k) as i32 - 1);
    }
    Ok(t * sum / (2.0 * mf) + double_factorial_ratio(m) * x.sinh().atan())
}

/// Dispatches integer exponents to the matching closed form.
pub fn integral_i_closed(aprime: u32, x: f64) -> Result<f64> {
    match aprime {
        0 => Err(Error::InvalidParameter {
            name: "a_prime",
            value: 0.0,
            reason: "closed forms need a positive integer exponent",
        }),
        1 => Ok(integral_i_one(x)),
        n if n % 2 == 0 => integral_i_closed_even(n / 2, x),
        n => integral_i_closed_odd(n / 2, x),
    }
}

/// `I_inf = (sqrt(pi)/2) Gamma(A'/2) / Gamma((A'+1)/2)`, the limit of
/// `I_{A'}(x)` as `x -> inf`. Returns `+inf` for `A' < 1e-12`.
pub fn integral_i_asymptote(aprime: f64) -> Result<f64> {
    check_exponent(aprime)?;
    if aprime < ASYMPTOTE_CUTOFF {
        return Ok(f64::INFINITY);
    }
    Ok(0.5 * std::f64::consts::PI.sqrt() * gamma_ratio(0.5 * aprime, 0.5 * (aprime + 1.0)))
}

/// Asymptotic added noise for an amplifier switched on at `tau0 = 0`,
/// `(1/2 + n_M) sqrt(pi) Gamma(A'/2 + 1) / Gamma((A'+1)/2)`.
pub fn asymptotic_added_noise(aprime: f64, n_medium: f64) -> Result<f64> {
    if !(aprime >= 0.0) || !aprime.is_finite() {
        return Err(Error::InvalidParameter {
            name: "a_prime",
            value: aprime,
            reason: "must be finite and non-negative",
        });
    }
    if !(n_medium >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "n_medium",
            value: n_medium,
            reason: "must be non-negative",
        });
    }
    Ok((0.5 + n_medium) * std::f64::consts::PI.sqrt() * gamma_ratio(0.5 * aprime + 1.0, 0.5 * (aprime + 1.0)))
}

/// Caves limit `1/2 + n_M`: the smallest asymptotic added noise.
pub fn caves_limit(n_medium: f64) -> f64 {
    0.5 + n_medium
}

/// Added noise of the constant-coefficient amplifier,
/// `1/2 (A + C)/(A - C) (1 - 1/G)`.
pub fn standard_added_noise(a_rate: f64, c_rate: f64, gain_value: f64) -> Result<f64> {
    if !(a_rate > c_rate) || c_rate < 0.0 {
        return Err(Error::Domain {
            what: "standard added noise",
            domain: "amplifying rates A > C >= 0",
            value: a_rate - c_rate,
        });
    }
    if !(gain_value >= 1.0) {
        return Err(Error::Domain {
            what: "standard added noise",
            domain: "gain >= 1",
            value: gain_value,
        });
    }
    Ok(0.5 * (a_rate + c_rate) / (a_rate - c_rate) * (1.0 - 1.0 / gain_value))
}

/// Evaluates the noise quantities of one parameter set, caching `I(tau0)`.
#[derive(Debug, Clone)]
pub struct NoiseKernel {
    params: AmplifierParams,
    i_tau0: f64,
    opts: QuadratureOptions,
}

impl NoiseKernel {
    pub fn new(params: AmplifierParams) -> Result<Self> {
        Self::with_options(params, QuadratureOptions::default())
    }

    pub fn with_options(params: AmplifierParams, opts: QuadratureOptions) -> Result<Self> {
        params.validate()?;
        let i_tau0 = integral_i_with(params.a_prime, params.tau0, &opts)?;
        Ok(Self { params, i_tau0, opts })
    }

    pub fn params(&self) -> &AmplifierParams {
        &self.params
    }

    /// `G(tau) int_0^tau G^-1(s) ds`, integrated as
    /// `int_{-tau0}^{tau - tau0} (cosh(tau - tau0) / cosh u)^{A'} du`.
    ///
    /// The same quantity is `cosh^{A'}(tau - tau0) [I(tau - tau0) + I(tau0)]`,
    /// but before the switch the two integrals cancel and the prefactor
    /// blows the rounding error up by `e^{A' |tau - tau0|}`. The scaled
    /// integrand is positive and at most `O(1)` near the upper end.
    fn propagated_integral(&self, tau: f64) -> Result<f64> {
        let p = &self.params;
        let x = tau - p.tau0;
        let top = log_cosh(x);
        integrate_with_breaks(
            |u| (p.a_prime * (top - log_cosh(u))).exp(),
            -p.tau0,
            x,
            &[0.0],
            &self.opts,
        )
    }

    pub fn record(&self, tau: f64) -> Result<NoiseRecord> {
        check_forward_time("noise", tau)?;
        let p = &self.params;
        let log_gain = p.log_gain(tau)?;
        let gain = log_gain.exp();
        let delta = 0.5 * p.rate_sum() * self.propagated_integral(tau)?;
        Ok(NoiseRecord {
            tau,
            gain,
            delta,
            added_noise: delta * (-log_gain).exp(),
            m_width: 0.5 * (gain - 1.0) + delta,
        })
    }

    pub fn delta(&self, tau: f64) -> Result<f64> {
        self.record(tau).map(|r| r.delta)
    }

    pub fn added_noise(&self, tau: f64) -> Result<f64> {
        self.record(tau).map(|r| r.added_noise)
    }

    /// `lim_{tau -> inf}` of the added noise for arbitrary `tau0`.
    pub fn asymptotic_added_noise(&self) -> Result<f64> {
        let p = &self.params;
        let i_inf = integral_i_asymptote(p.a_prime)?;
        Ok(0.5 * p.rate_sum() * (p.a_prime * log_cosh(p.tau0)).exp() * (i_inf + self.i_tau0))
    }
}

/// Noise width `Delta(tau)`.
pub fn delta(params: &AmplifierParams, tau: f64) -> Result<f64> {
    NoiseKernel::new(*params)?.delta(tau)
}

/// Added noise `Delta(tau) / G(tau)`.
pub fn added_noise(params: &AmplifierParams, tau: f64) -> Result<f64> {
    NoiseKernel::new(*params)?.added_noise(tau)
}

/// Spontaneous-emission width `m(tau) = (G - 1)/2 + Delta`.
pub fn m_width(params: &AmplifierParams, tau: f64) -> Result<f64> {
    NoiseKernel::new(*params)?.record(tau).map(|r| r.m_width)
}
