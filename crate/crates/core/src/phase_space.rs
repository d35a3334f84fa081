//! Characteristic-function solution and the quasiprobability functions
//! derived from it.
//!
//! The output characteristic function is
//! `chi_tau(xi) = exp(-Delta |xi|^2) chi_0(sqrt(G) e^{i theta} xi)`, which
//! moves the mean amplitude to `sqrt(G) e^{-i theta} alpha_0`. Grids for the
//! Gaussian input classes are evaluated in closed form; ordering `p` shifts
//! the `alpha`-plane covariance by `-p/4`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplifier::AmplifierParams;
use crate::field::{Gaussian, InputField};
use crate::noise::NoiseKernel;
use crate::{Error, Result};

/// Quasiprobability ordering: `p = -1, 0, +1` for Q, Wigner and P.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuasiOrder {
    Q,
    Wigner,
    P,
}

impl QuasiOrder {
    pub fn p(self) -> f64 {
        match self {
            Self::Q => -1.0,
            Self::Wigner => 0.0,
            Self::P => 1.0,
        }
    }
}

/// Output characteristic function at a fixed time.
#[derive(Debug, Clone, Copy)]
pub struct CharFn {
    pub input: InputField,
    pub tau: f64,
    pub gain: f64,
    pub delta: f64,
    pub theta: f64,
}

impl CharFn {
    pub fn new(params: &AmplifierParams, input: &InputField, tau: f64) -> Result<Self> {
        input.validate()?;
        let nr = NoiseKernel::new(*params)?.record(tau)?;
        Ok(Self {
            input: *input,
            tau,
            gain: nr.gain,
            delta: nr.delta,
            theta: params.phase(tau),
        })
    }

    pub fn eval(&self, xi: Complex64) -> Complex64 {
        let scaled = self.gain.sqrt() * Complex64::from_polar(1.0, self.theta) * xi;
        (-self.delta * xi.norm_sqr()).exp() * self.input.char_fn(scaled)
    }

    /// Output state as a Gaussian in `(u, v)`; `None` for Fock inputs.
    pub fn gaussian(&self) -> Option<Gaussian> {
        self.input
            .gaussian()
            .map(|g| g.amplified(self.gain, self.delta, self.theta))
    }

    /// Rough inverse length scale of `chi` used to size difference steps.
    fn scale(&self) -> f64 {
        let spread = self.gain * (self.input.sym_fluct() + self.input.mean_n()) + self.delta;
        1.0 / (1.0 + spread).sqrt()
    }
}

/// Normally ordered moment from finite differences of `e^{|xi|^2/2} chi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub value: Complex64,
    /// Set for orders above two when `Delta > 1e3`, where cancellation in the
    /// difference stencils dominates.
    pub ill_conditioned: bool,
}

pub const MAX_MOMENT_ORDER: u32 = 4;

/// `<a^{dagger m} a^n> = d_xi^m (-d_xi*)^n [e^{|xi|^2/2} chi(xi)]` at `xi = 0`.
///
/// Wirtinger derivatives are expanded into mixed real partials, each taken
/// with central stencils and two rounds of Richardson extrapolation.
pub fn moments_from_chi(chi: &CharFn, m: u32, n: u32) -> Result<MomentEstimate> {
    let order = m + n;
    if order > MAX_MOMENT_ORDER {
        return Err(Error::Unsupported("moments_from_chi supports m + n <= 4"));
    }
    let f = |x: f64, y: f64| {
        let xi = Complex64::new(x, y);
        (0.5 * xi.norm_sqr()).exp() * chi.eval(xi)
    };
    // (d_x - i d_y)^m (d_x + i d_y)^n (-1)^n / 2^(m+n) as {(jx, jy): coeff}
    let mut poly = vec![((0u32, 0u32), Complex64::new(1.0, 0.0))];
    let factors = std::iter::repeat_n(-1.0, m as usize).chain(std::iter::repeat_n(1.0, n as usize));
    for sign in factors {
        let mut next: Vec<((u32, u32), Complex64)> = Vec::new();
        for &((jx, jy), c) in &poly {
            for (key, mult) in [
                ((jx + 1, jy), Complex64::new(1.0, 0.0)),
                ((jx, jy + 1), Complex64::new(0.0, sign)),
            ] {
                match next.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, v)) => *v += c * mult,
                    None => next.push((key, c * mult)),
                }
            }
        }
        poly = next;
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let prefactor = sign / 2f64.powi(order as i32);
    let base = match order {
        0 => 1.0,
        1 => 1e-4,
        2 => 1e-3,
        _ => 1e-1,
    } * chi.scale();
    let mut value = Complex64::new(0.0, 0.0);
    for ((jx, jy), c) in poly {
        value += c * mixed_partial(&f, jx, jy, base);
    }
    Ok(MomentEstimate {
        value: value * prefactor,
        ill_conditioned: order > 2 && chi.delta > 1e3,
    })
}

fn stencil(order: u32) -> &'static [(i32, f64)] {
    match order {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => unreachable!("order checked by caller"),
    }
}

fn mixed_partial<F: Fn(f64, f64) -> Complex64>(f: &F, jx: u32, jy: u32, h: f64) -> Complex64 {
    let at = |h: f64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(ix, wx) in stencil(jx) {
            for &(iy, wy) in stencil(jy) {
                acc += wx * wy * f(ix as f64 * h, iy as f64 * h);
            }
        }
        acc / h.powi((jx + jy) as i32)
    };
    if jx + jy == 0 {
        return at(h);
    }
    let (d1, d2, d4) = (at(h), at(0.5 * h), at(0.25 * h));
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d4 - d2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// Uniform axis `[min, max]` with `points` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points).map(|i| self.min + i as f64 * h).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub re: Axis,
    pub im: Axis,
}

pub const DEFAULT_GRID_POINTS: usize = 256;
/// Auto-sized grids extend this many standard deviations from the center.
pub const AUTO_SIGMAS: f64 = 6.0;
/// A supplied grid must cover at least this many standard deviations.
pub const MIN_COVER_SIGMAS: f64 = 5.0;

impl GridSpec {
    pub fn square(center: Complex64, half_width: f64, points: usize) -> Self {
        Self {
            re: Axis {
                min: center.re - half_width,
                max: center.re + half_width,
                points,
            },
            im: Axis {
                min: center.im - half_width,
                max: center.im + half_width,
                points,
            },
        }
    }

    pub fn contains_box(&self, center: Complex64, half_width: f64) -> bool {
        center.re - half_width >= self.re.min
            && center.re + half_width <= self.re.max
            && center.im - half_width >= self.im.min
            && center.im + half_width <= self.im.max
    }
}

/// Sampled quasiprobability function; `values` is row-major with the
/// imaginary axis as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    pub spec: GridSpec,
    pub order: QuasiOrder,
    pub tau: f64,
    pub values: Vec<f64>,
}

/// JSON sidecar describing a grid file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridHeader {
    pub re_axis: Axis,
    pub im_axis: Axis,
    pub p_order: i32,
    pub tau: f64,
    pub params: AmplifierParams,
    pub input: InputField,
}

impl PhaseSpaceGrid {
    pub fn value(&self, i_re: usize, i_im: usize) -> f64 {
        self.values[i_im * self.spec.re.points + i_re]
    }

    pub fn cell_area(&self) -> f64 {
        self.spec.re.step() * self.spec.im.step()
    }

    /// Riemann sum of the grid values.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Riemann estimate of `int g(alpha) W(alpha) d^2 alpha`.
    pub fn expectation<T, F>(&self, g: F) -> T
    where
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
        F: Fn(Complex64) -> T,
    {
        let re = self.spec.re.values();
        let im = self.spec.im.values();
        let area = self.cell_area();
        im.iter()
            .enumerate()
            .flat_map(|(j, &y)| re.iter().enumerate().map(move |(i, &x)| (i, j, x, y)))
            .map(|(i, j, x, y)| g(Complex64::new(x, y)) * (self.value(i, j) * area))
            .sum()
    }

    pub fn header(&self, params: &AmplifierParams, input: &InputField) -> GridHeader {
        GridHeader {
            re_axis: self.spec.re,
            im_axis: self.spec.im,
            p_order: self.order.p() as i32,
            tau: self.tau,
            params: *params,
            input: *input,
        }
    }

    /// CSV rows `alpha_re,alpha_im,value` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "alpha_re,alpha_im,value")?;
        let re = self.spec.re.values();
        let im = self.spec.im.values();
        for (j, &y) in im.iter().enumerate() {
            for (i, &x) in re.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{}",
                    crate::export::fmt_f64(x),
                    crate::export::fmt_f64(y),
                    crate::export::fmt_f64(self.value(i, j))
                )?;
            }
        }
        Ok(())
    }
}

/// Bivariate normal density in the `alpha` plane.
#[derive(Debug, Clone, Copy)]
struct PlaneGaussian {
    center: Complex64,
    inv: [[f64; 2]; 2],
    norm: f64,
    sigma_max: f64,
}

impl PlaneGaussian {
    fn new(g: &Gaussian, order: QuasiOrder) -> Result<Self> {
        let shift = 0.25 * order.p();
        let s = [
            [0.5 * g.cov[0][0] - shift, 0.5 * g.cov[0][1]],
            [0.5 * g.cov[1][0], 0.5 * g.cov[1][1] - shift],
        ];
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        let trace = s[0][0] + s[1][1];
        let disc = (0.25 * trace * trace - det).max(0.0).sqrt();
        let (lo, hi) = (0.5 * trace - disc, 0.5 * trace + disc);
        if !(lo > 0.0) {
            // width of the isotropic kernel, in units where P ~ exp(-|a|^2/m)
            return Err(Error::IllDefinedP { width: 2.0 * lo });
        }
        Ok(Self {
            center: g.mean_amplitude(),
            inv: [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]],
            norm: 1.0 / (2.0 * std::f64::consts::PI * det.sqrt()),
            sigma_max: hi.sqrt(),
        })
    }

    fn density(&self, alpha: Complex64) -> f64 {
        let d = [alpha.re - self.center.re, alpha.im - self.center.im];
        let q = d[0] * (self.inv[0][0] * d[0] + self.inv[0][1] * d[1])
            + d[1] * (self.inv[1][0] * d[0] + self.inv[1][1] * d[1]);
        self.norm * (-0.5 * q).exp()
    }
}

fn render(density: &PlaneGaussian, spec: Option<GridSpec>, order: QuasiOrder, tau: f64) -> Result<PhaseSpaceGrid> {
    let spec = match spec {
        Some(s) => {
            let need = MIN_COVER_SIGMAS * density.sigma_max;
            if !s.contains_box(density.center, need) || s.re.points < 2 || s.im.points < 2 {
                return Err(Error::GridTooSmall {
                    needed: format!(
                        "center {:.6}{:+.6}i +/- {:.6}",
                        density.center.re, density.center.im, need
                    ),
                    available: format!("re [{}, {}] x im [{}, {}]", s.re.min, s.re.max, s.im.min, s.im.max),
                });
            }
            s
        }
        None => GridSpec::square(density.center, AUTO_SIGMAS * density.sigma_max, DEFAULT_GRID_POINTS),
    };
    let re = spec.re.values();
    let im = spec.im.values();
    let values: Vec<f64> = im
        .par_iter()
        .flat_map_iter(|&y| re.iter().map(move |&x| density.density(Complex64::new(x, y))))
        .collect();
    Ok(PhaseSpaceGrid {
        spec,
        order,
        tau,
        values,
    })
}

/// Quasiprobability grid of the output field for a Gaussian input.
pub fn quasi_grid(
    params: &AmplifierParams,
    input: &InputField,
    tau: f64,
    order: QuasiOrder,
    spec: Option<GridSpec>,
) -> Result<PhaseSpaceGrid> {
    let chi = CharFn::new(params, input, tau)?;
    let g = chi.gaussian().ok_or(Error::NonGaussianInput(input.kind()))?;
    render(&PlaneGaussian::new(&g, order)?, spec, order, tau)
}

/// Wigner function of an amplified coherent state: isotropic Gaussian of
/// width `Delta + G/2` centered at `sqrt(G) e^{-i theta} alpha_0`.
pub fn wigner_coherent(
    params: &AmplifierParams,
    alpha0: Complex64,
    tau: f64,
    spec: Option<GridSpec>,
) -> Result<PhaseSpaceGrid> {
    quasi_grid(
        params,
        &InputField::Coherent { alpha: alpha0 },
        tau,
        QuasiOrder::Wigner,
        spec,
    )
}

/// Wigner function of an amplified squeezed vacuum (`phi = 0`) in the frame
/// rotating at the field frequency: product of Gaussians with quadrature
/// variances `G e^{-2r}/2 + Delta` and `G e^{2r}/2 + Delta`.
pub fn wigner_squeezed_vacuum(
    params: &AmplifierParams,
    r: f64,
    tau: f64,
    spec: Option<GridSpec>,
) -> Result<PhaseSpaceGrid> {
    quasi_grid(
        &params.rotating_frame(),
        &InputField::squeezed_vacuum(r),
        tau,
        QuasiOrder::Wigner,
        spec,
    )
}

/// Wigner function of an amplified thermal state: isotropic Gaussian of
/// width `<n>_out + 1/2`.
pub fn wigner_thermal(params: &AmplifierParams, nbar: f64, tau: f64, spec: Option<GridSpec>) -> Result<PhaseSpaceGrid> {
    quasi_grid(params, &InputField::thermal(nbar), tau, QuasiOrder::Wigner, spec)
}

/// Value of a transition kernel, or the point mass it degenerates to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelValue {
    Density(f64),
    Delta { center: Complex64 },
}

/// Wigner propagator `exp(-|b|^2 / Delta) / (pi Delta)` with
/// `b = alpha - sqrt(G) e^{-i theta} alpha_0`; normalized over `d^2 alpha`.
pub fn wigner_propagator(
    params: &AmplifierParams,
    alpha: Complex64,
    alpha0: Complex64,
    tau: f64,
) -> Result<KernelValue> {
    let nr = NoiseKernel::new(*params)?.record(tau)?;
    let center = nr.gain.sqrt() * Complex64::from_polar(1.0, -params.phase(tau)) * alpha0;
    if nr.delta <= 0.0 {
        return Ok(KernelValue::Delta { center });
    }
    let b = alpha - center;
    Ok(KernelValue::Density(
        (-b.norm_sqr() / nr.delta).exp() / (std::f64::consts::PI * nr.delta),
    ))
}

/// P-function transfer kernel `exp(-|alpha - sqrt(G) e^{-i theta} alpha_0|^2 / m) / (pi m)`
/// with `m = (G - 1)/2 + Delta`.
pub fn p_transfer(params: &AmplifierParams, alpha: Complex64, alpha0: Complex64, tau: f64) -> Result<KernelValue> {
    let nr = NoiseKernel::new(*params)?.record(tau)?;
    let center = nr.gain.sqrt() * Complex64::from_polar(1.0, -params.phase(tau)) * alpha0;
    let m = nr.m_width;
    if m < 0.0 {
        return Err(Error::IllDefinedP { width: m });
    }
    if m == 0.0 {
        return Ok(KernelValue::Delta { center });
    }
    let b = alpha - center;
    Ok(KernelValue::Density(
        (-b.norm_sqr() / m).exp() / (std::f64::consts::PI * m),
    ))
}
