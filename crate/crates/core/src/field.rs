//! Input-field descriptions and the output-field statistics they map to.
//!
//! The amplifier acts on the quadrature covariance as
//! `V -> G R(-theta) V R(-theta)^T + Delta * I` and on the mean amplitude as
//! `<a> -> sqrt(G) e^{-i theta} <a>`, where `theta = (omega0/epsilon) tau` is
//! the free rotation. Quadratures are `u = (a + a^dagger)/sqrt 2` and
//! `v = -i (a - a^dagger)/sqrt 2`; vacuum has `var u = var v = 1/2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplifier::AmplifierParams;
use crate::noise::{integral_i, NoiseKernel, NoiseRecord};
use crate::special::laguerre;
use crate::{Error, Result};

/// Single-mode input state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InputField {
    Coherent {
        alpha: Complex64,
    },
    Fock {
        n: u32,
    },
    /// `D(alpha) S(r e^{i phi}) |0>`: for `phi = 0` the `u` quadrature is
    /// squeezed to `e^{-2r}/2`; in general the squeezed axis sits at `phi/2`.
    Squeezed {
        r: f64,
        phi: f64,
        alpha: Complex64,
    },
    Thermal {
        nbar: f64,
    },
}

impl InputField {
    pub fn coherent(re: f64, im: f64) -> Self {
        Self::Coherent {
            alpha: Complex64::new(re, im),
        }
    }

    pub fn fock(n: u32) -> Self {
        Self::Fock { n }
    }

    pub fn squeezed_vacuum(r: f64) -> Self {
        Self::Squeezed {
            r,
            phi: 0.0,
            alpha: Complex64::new(0.0, 0.0),
        }
    }

    pub fn thermal(nbar: f64) -> Self {
        Self::Thermal { nbar }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Coherent { .. } => "coherent",
            Self::Fock { .. } => "fock",
            Self::Squeezed { .. } => "squeezed",
            Self::Thermal { .. } => "thermal",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name, z: Complex64| {
            if z.re.is_finite() && z.im.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value: f64::NAN,
                    reason: "amplitude must be finite",
                })
            }
        };
        match *self {
            Self::Coherent { alpha } => finite("alpha", alpha),
            Self::Fock { .. } => Ok(()),
            Self::Squeezed { r, phi, alpha } => {
                finite("alpha", alpha)?;
                if !(r >= 0.0) || !r.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "r",
                        value: r,
                        reason: "squeeze magnitude must be finite and non-negative",
                    });
                }
                if !phi.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "phi",
                        value: phi,
                        reason: "squeeze angle must be finite",
                    });
                }
                Ok(())
            }
            Self::Thermal { nbar } => {
                if nbar >= 0.0 && nbar.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        name: "nbar",
                        value: nbar,
                        reason: "mean occupation must be finite and non-negative",
                    })
                }
            }
        }
    }

    pub fn mean_a(&self) -> Complex64 {
        match *self {
            Self::Coherent { alpha } | Self::Squeezed { alpha, .. } => alpha,
            Self::Fock { .. } | Self::Thermal { .. } => Complex64::new(0.0, 0.0),
        }
    }

    pub fn mean_n(&self) -> f64 {
        match *self {
            Self::Coherent { alpha } => alpha.norm_sqr(),
            Self::Fock { n } => n as f64,
            Self::Squeezed { r, alpha, .. } => alpha.norm_sqr() + r.sinh().powi(2),
            Self::Thermal { nbar } => nbar,
        }
    }

    /// Photon-number variance `<n^2> - <n>^2`.
    pub fn photon_variance(&self) -> f64 {
        match *self {
            Self::Coherent { alpha } => alpha.norm_sqr(),
            Self::Fock { .. } => 0.0,
            Self::Squeezed { r, phi, alpha } => {
                let theta = alpha.arg();
                let (s2, c2) = ((2.0 * r).sinh(), (2.0 * r).cosh());
                alpha.norm_sqr() * (c2 - s2 * (2.0 * theta - phi).cos()) + 2.0 * (r.sinh() * r.cosh()).powi(2)
            }
            Self::Thermal { nbar } => nbar * nbar + nbar,
        }
    }

    /// Input Mandel parameter; `None` for the vacuum.
    pub fn mandel_q(&self) -> Option<f64> {
        let n = self.mean_n();
        (n > 0.0).then(|| (self.photon_variance() - n) / n)
    }

    /// Angle of the principal quadrature axes (the squeezed axis for
    /// squeezed inputs, zero otherwise).
    pub fn axis_angle(&self) -> f64 {
        match *self {
            Self::Squeezed { phi, .. } => 0.5 * phi,
            _ => 0.0,
        }
    }

    /// Quadrature variances along the principal axes, squeezed axis first.
    pub fn quadrature_variances(&self) -> (f64, f64) {
        match *self {
            Self::Squeezed { r, .. } => (0.5 * (-2.0 * r).exp(), 0.5 * (2.0 * r).exp()),
            _ => {
                let s = self.sym_fluct();
                (s, s)
            }
        }
    }

    /// Symmetric fluctuation `|Delta a|^2 = <{a, a^dagger}>/2 - |<a>|^2`.
    pub fn sym_fluct(&self) -> f64 {
        match *self {
            Self::Coherent { .. } => 0.5,
            Self::Fock { n } => n as f64 + 0.5,
            Self::Squeezed { r, .. } => 0.5 * (2.0 * r).cosh(),
            Self::Thermal { nbar } => nbar + 0.5,
        }
    }

    pub fn is_gaussian(&self) -> bool {
        !matches!(self, Self::Fock { n } if *n > 0)
    }

    /// Mean `(u, v)` and covariance of a Gaussian input; `None` for Fock
    /// states with `n > 0`.
    pub fn gaussian(&self) -> Option<Gaussian> {
        if !self.is_gaussian() {
            return None;
        }
        let (vu, vv) = self.quadrature_variances();
        let cov = rotate_cov([[vu, 0.0], [0.0, vv]], self.axis_angle());
        let m = self.mean_a();
        Some(Gaussian {
            mean: [std::f64::consts::SQRT_2 * m.re, std::f64::consts::SQRT_2 * m.im],
            cov,
        })
    }

    /// Symmetrically ordered characteristic function `Tr[rho D(xi)]`,
    /// `D(xi) = exp(xi a^dagger - xi^* a)`.
    pub fn char_fn(&self, xi: Complex64) -> Complex64 {
        match *self {
            Self::Fock { n } => {
                let x = xi.norm_sqr();
                Complex64::new((-0.5 * x).exp() * laguerre(n, x), 0.0)
            }
            _ => self.gaussian().expect("non-Fock inputs are Gaussian").char_fn(xi),
        }
    }
}

/// Gaussian state in `(u, v)` quadrature coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

impl Gaussian {
    pub fn char_fn(&self, xi: Complex64) -> Complex64 {
        let k = [std::f64::consts::SQRT_2 * xi.im, -std::f64::consts::SQRT_2 * xi.re];
        let quad = k[0] * (self.cov[0][0] * k[0] + self.cov[0][1] * k[1])
            + k[1] * (self.cov[1][0] * k[0] + self.cov[1][1] * k[1]);
        let phase = k[0] * self.mean[0] + k[1] * self.mean[1];
        Complex64::new(-0.5 * quad, phase).exp()
    }

    /// Mean amplitude `<a> = (u + i v) / sqrt 2`.
    pub fn mean_amplitude(&self) -> Complex64 {
        Complex64::new(self.mean[0], self.mean[1]) / std::f64::consts::SQRT_2
    }

    /// Apply the amplifier map for gain `g`, noise width `delta`, rotation `theta`.
    pub fn amplified(&self, g: f64, delta: f64, theta: f64) -> Self {
        let (s, c) = (-theta).sin_cos();
        let sg = g.sqrt();
        let mean = [
            sg * (c * self.mean[0] - s * self.mean[1]),
            sg * (s * self.mean[0] + c * self.mean[1]),
        ];
        let r = rotate_cov(self.cov, -theta);
        Self {
            mean,
            cov: [[g * r[0][0] + delta, g * r[0][1]], [g * r[1][0], g * r[1][1] + delta]],
        }
    }
}

/// `R(angle) V R(angle)^T`.
pub(crate) fn rotate_cov(v: [[f64; 2]; 2], angle: f64) -> [[f64; 2]; 2] {
    let (s, c) = angle.sin_cos();
    let r = [[c, -s], [s, c]];
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = (0..2)
                .map(|k| (0..2).map(|l| r[i][k] * v[k][l] * r[j][l]).sum::<f64>())
                .sum();
        }
    }
    out
}

/// First and second moments of the output field at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub tau: f64,
    pub mean_a: Complex64,
    pub sym_fluct: f64,
    /// Variance along the input's principal (squeezed) axis, rotating frame.
    pub var_u: f64,
    pub var_v: f64,
    pub mean_n: f64,
    /// `None` when the output is the vacuum (0/0).
    pub mandel_q: Option<f64>,
}

/// Result of the squeezing-retention test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingCheck {
    pub retained: bool,
    /// `1/2 - var_u`; positive while the output stays squeezed.
    pub margin: f64,
}

/// Root of a scanned function, with the gain at that time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub tau: f64,
    pub gain: f64,
}

/// Output-field statistics for one parameter set.
#[derive(Debug, Clone)]
pub struct FieldStats {
    kernel: NoiseKernel,
}

impl FieldStats {
    pub fn new(params: AmplifierParams) -> Result<Self> {
        Ok(Self {
            kernel: NoiseKernel::new(params)?,
        })
    }

    pub fn params(&self) -> &AmplifierParams {
        self.kernel.params()
    }

    pub fn noise(&self, tau: f64) -> Result<NoiseRecord> {
        self.kernel.record(tau)
    }

    pub fn mean_amplitude(&self, input: &InputField, tau: f64) -> Result<Complex64> {
        let g = self.params().gain(tau)?;
        let theta = self.params().phase(tau);
        Ok(g.sqrt() * Complex64::from_polar(1.0, -theta) * input.mean_a())
    }

    /// `|Delta a|^2_out = G |Delta a|^2_in + Delta`.
    pub fn output_fluctuations(&self, input: &InputField, tau: f64) -> Result<f64> {
        let nr = self.noise(tau)?;
        Ok(nr.gain * input.sym_fluct() + nr.delta)
    }

    /// `G (var_in + A)` along both principal axes.
    pub fn quadrature_variances(&self, input: &InputField, tau: f64) -> Result<(f64, f64)> {
        let nr = self.noise(tau)?;
        let (vu, vv) = input.quadrature_variances();
        Ok((nr.gain * vu + nr.delta, nr.gain * vv + nr.delta))
    }

    pub fn squeezing_retained(&self, input: &InputField, tau: f64) -> Result<SqueezingCheck> {
        if !matches!(input, InputField::Squeezed { .. }) {
            return Err(Error::Unsupported("squeezing retention needs a squeezed input"));
        }
        let (vu, _) = self.quadrature_variances(input, tau)?;
        let margin = 0.5 - vu;
        Ok(SqueezingCheck {
            retained: margin > 0.0,
            margin,
        })
    }

    /// `<n>_out = G <n>_in + m(tau)`.
    pub fn mean_photon_number(&self, input: &InputField, tau: f64) -> Result<f64> {
        let nr = self.noise(tau)?;
        Ok(nr.gain * input.mean_n() + nr.m_width)
    }

    /// Output Mandel parameter
    /// `Q = [<n>^2_out + G^2 <n>_in (Q_in - <n>_in)] / <n>_out`, with
    /// `<n>_in Q_in` taken as `var_in(n) - <n>_in` so the vacuum is covered.
    pub fn mandel_q(&self, input: &InputField, tau: f64) -> Result<f64> {
        let nr = self.noise(tau)?;
        let n_in = input.mean_n();
        let n_out = nr.gain * n_in + nr.m_width;
        mandel_from_parts(n_out, nr.gain, n_in, input.photon_variance())
    }

    pub fn moments(&self, input: &InputField, tau: f64) -> Result<MomentSet> {
        let nr = self.noise(tau)?;
        let g = nr.gain;
        let (vu, vv) = input.quadrature_variances();
        let n_in = input.mean_n();
        let mean_n = g * n_in + nr.m_width;
        let theta = self.params().phase(tau);
        Ok(MomentSet {
            tau,
            mean_a: g.sqrt() * Complex64::from_polar(1.0, -theta) * input.mean_a(),
            sym_fluct: g * input.sym_fluct() + nr.delta,
            var_u: g * vu + nr.delta,
            var_v: g * vv + nr.delta,
            mean_n,
            mandel_q: mandel_from_parts(mean_n, g, n_in, input.photon_variance()).ok(),
        })
    }

    /// First time in `(0, tau_max]` where the output Mandel parameter turns
    /// non-negative, located by bisection to `1e-8` in `tau`.
    pub fn mandel_crossing(&self, input: &InputField, tau_max: f64, samples: usize) -> Result<Option<Crossing>> {
        let f = |tau: f64| self.mandel_q(input, tau);
        self.first_crossing(f, tau_max, samples)
    }

    /// First time where the squeezed-axis variance reaches the vacuum level 1/2.
    pub fn squeezing_loss_time(&self, input: &InputField, tau_max: f64, samples: usize) -> Result<Option<Crossing>> {
        let f = |tau: f64| self.quadrature_variances(input, tau).map(|(vu, _)| vu - 0.5);
        self.first_crossing(f, tau_max, samples)
    }

    fn first_crossing<F>(&self, f: F, tau_max: f64, samples: usize) -> Result<Option<Crossing>>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let samples = samples.max(2);
        let step = tau_max / (samples - 1) as f64;
        // tau = 0 is skipped: the vacuum gives Q = 0/0 there.
        let mut lo = step * 1e-3;
        let mut f_lo = f(lo)?;
        if f_lo >= 0.0 {
            return Ok(None);
        }
        for i in 1..samples {
            let hi = i as f64 * step;
            let f_hi = f(hi)?;
            if f_hi >= 0.0 {
                let tau = bisect(&f, lo, hi, 1e-8)?;
                let gain = self.params().gain(tau)?;
                return Ok(Some(Crossing { tau, gain }));
            }
            lo = hi;
            f_lo = f_hi;
        }
        debug_assert!(f_lo < 0.0);
        Ok(None)
    }
}

fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn mandel_from_parts(n_out: f64, g: f64, n_in: f64, var_in: f64) -> Result<f64> {
    if !(n_out > 0.0) {
        return Err(Error::MandelUndefined);
    }
    let excess_in = var_in - n_in - n_in * n_in;
    Ok((n_out * n_out + g * g * excess_in) / n_out)
}

/// Gain bound for retained squeezing when `tau0 = 0`:
/// `G < 1 / (s^2 + (A' + 2B') I_{A'}(tau))` with `s = e^{-r}`.
pub fn squeezing_gain_bound(params: &AmplifierParams, r: f64, tau: f64) -> Result<f64> {
    if params.tau0 != 0.0 {
        return Err(Error::Unsupported("the closed gain bound holds for tau0 = 0 only"));
    }
    let s2 = (-2.0 * r).exp();
    Ok(1.0 / (s2 + params.rate_sum() * integral_i(params.a_prime, tau)?))
}

pub fn mean_amplitude(params: &AmplifierParams, input: &InputField, tau: f64) -> Result<Complex64> {
    FieldStats::new(*params)?.mean_amplitude(input, tau)
}

pub fn output_fluctuations(params: &AmplifierParams, input: &InputField, tau: f64) -> Result<f64> {
    FieldStats::new(*params)?.output_fluctuations(input, tau)
}

pub fn quadrature_variances(params: &AmplifierParams, input: &InputField, tau: f64) -> Result<(f64, f64)> {
    FieldStats::new(*params)?.quadrature_variances(input, tau)
}

pub fn squeezing_retained(params: &AmplifierParams, input: &InputField, tau: f64) -> Result<SqueezingCheck> {
    FieldStats::new(*params)?.squeezing_retained(input, tau)
}

pub fn mean_photon_number(params: &AmplifierParams, input: &InputField, tau: f64) -> Result<f64> {
    FieldStats::new(*params)?.mean_photon_number(input, tau)
}

pub fn mandel_q(params: &AmplifierParams, input: &InputField, tau: f64) -> Result<f64> {
    FieldStats::new(*params)?.mandel_q(input, tau)
}
