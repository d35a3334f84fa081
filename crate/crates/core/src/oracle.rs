//! Brute-force verifier: the time-dependent amplifier master equation
//! integrated in a truncated Fock basis.
//!
//! With gain coefficient `A'(tau)` on the `a^dagger` dissipator and loss
//! coefficient `C'(tau)` on the `a` dissipator, each carrying a factor 1/2,
//! the moments obey `d<a>/dtau = W<a>/2`, `d<n>/dtau = W<n> + A'(tau)` and
//! `d<a^2>/dtau = W<a^2>`, with `W = A'(tau) - C'(tau)`. The truncated `a a^dagger`
//! has a zero in its last diagonal entry, which makes the generator exactly
//! trace preserving; probability that would leave the basis piles up in the
//! top level instead and shows up in the leakage diagnostic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplifier::{AmplifierParams, CoefficientProfile};
use crate::field::InputField;
use crate::rk4::{step_count, ComplexOde, Rk4};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Trace drift beyond which a run is rejected as under-resolved in time.
pub const MAX_TRACE_DRIFT: f64 = 1e-6;
/// Default bound on the population of the top tenth of the basis.
pub const DEFAULT_LEAKAGE_THRESHOLD: f64 = 1e-6;

/// Density matrix on Fock levels `0..dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

/// Moments read off a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleMoments {
    pub mean_a: Complex64,
    pub mean_a2: Complex64,
    pub mean_n: f64,
    pub mean_n2: f64,
    /// `<n> + 1/2 - |<a>|^2`.
    pub sym_fluct: f64,
    pub var_u: f64,
    pub var_v: f64,
    pub mandel_q: Option<f64>,
}

impl DensityMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 2, "truncation needs at least two levels");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn vacuum(dim: usize) -> Self {
        Self::fock(dim, 0).expect("level 0 always fits")
    }

    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(too_small(format!("Fock level {n}"), dim));
        }
        let mut rho = Self::zeros(dim);
        rho[(n, n)] = Complex64::new(1.0, 0.0);
        Ok(rho)
    }

    /// Truncated geometric distribution, renormalized.
    pub fn thermal(dim: usize, nbar: f64) -> Self {
        let q = nbar / (1.0 + nbar);
        let mut rho = Self::zeros(dim);
        let mut p = 1.0;
        let mut total = 0.0;
        for k in 0..dim {
            rho[(k, k)] = Complex64::new(p, 0.0);
            total += p;
            p *= q;
        }
        rho.scale(1.0 / total);
        rho
    }

    /// `|psi><psi|` for a state vector, renormalized.
    pub fn pure(psi: &[Complex64]) -> Self {
        let dim = psi.len();
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        let mut rho = Self::zeros(dim);
        for m in 0..dim {
            for n in 0..dim {
                rho[(m, n)] = psi[m] * psi[n].conj() / norm;
            }
        }
        rho
    }

    pub fn coherent(dim: usize, alpha: Complex64) -> Self {
        let mut psi = vec![ZERO; dim];
        psi[0] = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 1..dim {
            psi[n] = psi[n - 1] * alpha / (n as f64).sqrt();
        }
        Self::pure(&psi)
    }

    /// `D(alpha) S(r e^{i phi}) |0>`, built in a padded basis and truncated.
    pub fn squeezed(dim: usize, r: f64, phi: f64, alpha: Complex64) -> Self {
        let pad = 2 * dim + 40;
        let mut psi = vec![ZERO; pad];
        let t = -Complex64::from_polar(r.tanh(), phi);
        // c_{2k} = t^k sqrt((2k)!) / (2^k k!) / sqrt(cosh r)
        let mut c = Complex64::new(1.0 / r.cosh().sqrt(), 0.0);
        psi[0] = c;
        let mut k = 1;
        while 2 * k < pad {
            let kf = k as f64;
            c *= t * ((2.0 * kf) * (2.0 * kf - 1.0)).sqrt() / (2.0 * kf);
            psi[2 * k] = c;
            k += 1;
        }
        if alpha.norm_sqr() > 0.0 {
            psi = displace(&psi, alpha);
        }
        psi.truncate(dim);
        Self::pure(&psi)
    }

    pub fn from_input(input: &InputField, dim: usize) -> Result<Self> {
        input.validate()?;
        Ok(match *input {
            InputField::Coherent { alpha } => Self::coherent(dim, alpha),
            InputField::Fock { n } => Self::fock(dim, n as usize)?,
            InputField::Squeezed { r, phi, alpha } => Self::squeezed(dim, r, phi, alpha),
            InputField::Thermal { nbar } => Self::thermal(dim, nbar),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    fn scale(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self[(k, k)]).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim).map(|k| self[(k, k)].re).collect()
    }

    /// `max |rho - rho^dagger|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 0..self.dim {
            for n in m..self.dim {
                worst = worst.max((self[(m, n)] - self[(n, m)].conj()).norm());
            }
        }
        worst
    }

    /// Population of the top tenth of the levels (at least one level).
    pub fn leakage(&self) -> f64 {
        let top = self.dim.div_ceil(10);
        (self.dim - top..self.dim).map(|k| self[(k, k)].re).sum()
    }

    /// Whether every eigenvalue is above `-floor`, tested by a Cholesky
    /// factorization of `rho + floor * I`.
    pub fn is_positive(&self, floor: f64) -> bool {
        let n = self.dim;
        let mut l = vec![ZERO; n * n];
        for j in 0..n {
            let mut d = self[(j, j)].re + floor;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if !(d > 0.0) {
                return false;
            }
            let d = d.sqrt();
            l[j * n + j] = Complex64::new(d, 0.0);
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / d;
            }
        }
        true
    }

    pub fn moments(&self) -> OracleMoments {
        let mut mean_a = ZERO;
        let mut mean_a2 = ZERO;
        let mut mean_n = 0.0;
        let mut mean_n2 = 0.0;
        for m in 0..self.dim {
            let mf = m as f64;
            let p = self[(m, m)].re;
            mean_n += mf * p;
            mean_n2 += mf * mf * p;
            if m >= 1 {
                mean_a += self[(m, m - 1)] * mf.sqrt();
            }
            if m >= 2 {
                mean_a2 += self[(m, m - 2)] * (mf * (mf - 1.0)).sqrt();
            }
        }
        let var_u = mean_a2.re + mean_n + 0.5 - 2.0 * mean_a.re * mean_a.re;
        let var_v = -mean_a2.re + mean_n + 0.5 - 2.0 * mean_a.im * mean_a.im;
        OracleMoments {
            mean_a,
            mean_a2,
            mean_n,
            mean_n2,
            sym_fluct: mean_n + 0.5 - mean_a.norm_sqr(),
            var_u,
            var_v,
            mandel_q: (mean_n > 0.0).then(|| (mean_n2 - mean_n * mean_n - mean_n) / mean_n),
        }
    }

    /// Variance of `(a e^{-i angle} + a^dagger e^{i angle}) / sqrt 2`.
    pub fn quadrature_variance(&self, angle: f64) -> f64 {
        let m = self.moments();
        let rot = Complex64::from_polar(1.0, -angle);
        let mean = (m.mean_a * rot).re;
        (m.mean_a2 * rot * rot).re + m.mean_n + 0.5 - 2.0 * mean * mean
    }

    /// Columns `<k| D(xi) |m>` for `m < dim`, `k < pad`, from a padded basis.
    fn displaced_basis(&self, xi: Complex64) -> (usize, Vec<Vec<Complex64>>) {
        let pad = 2 * self.dim + 40 + (4.0 * xi.norm_sqr()) as usize;
        let cols = (0..self.dim)
            .map(|m| {
                let mut e = vec![ZERO; pad];
                e[m] = Complex64::new(1.0, 0.0);
                displace(&e, xi)
            })
            .collect();
        (pad, cols)
    }

    /// Symmetrically ordered characteristic function `Tr[rho D(xi)]`.
    pub fn char_fn(&self, xi: Complex64) -> Complex64 {
        let (_, cols) = self.displaced_basis(xi);
        let mut acc = ZERO;
        for n in 0..self.dim {
            for m in 0..self.dim {
                acc += self[(n, m)] * cols[n][m];
            }
        }
        acc
    }

    /// Wigner density in the `alpha` plane (unit integral over `d^2 alpha`),
    /// from the displaced parity.
    #[allow(clippy::needless_range_loop)]
    pub fn wigner(&self, alpha: Complex64) -> f64 {
        let (pad, cols) = self.displaced_basis(-alpha);
        let mut acc = 0.0;
        for k in 0..pad {
            let mut s = ZERO;
            for m in 0..self.dim {
                let ekm = cols[m][k];
                if ekm == ZERO {
                    continue;
                }
                for n in 0..self.dim {
                    s += ekm * self[(m, n)] * cols[n][k].conj();
                }
            }
            acc += if k % 2 == 0 { s.re } else { -s.re };
        }
        2.0 / std::f64::consts::PI * acc
    }
}

impl std::ops::Index<(usize, usize)> for DensityMatrix {
    type Output = Complex64;
    fn index(&self, (m, n): (usize, usize)) -> &Complex64 {
        &self.data[m * self.dim + n]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DensityMatrix {
    fn index_mut(&mut self, (m, n): (usize, usize)) -> &mut Complex64 {
        &mut self.data[m * self.dim + n]
    }
}

fn too_small(needed: String, dim: usize) -> Error {
    Error::GridTooSmall {
        needed,
        available: format!("{dim} Fock levels"),
    }
}

/// `exp(xi a^dagger - xi^* a) psi` by Taylor series over short sub-steps.
/// The truncated generator is anti-Hermitian, so the norm is kept.
fn displace(psi: &[Complex64], xi: Complex64) -> Vec<Complex64> {
    let n = psi.len();
    let substeps = (xi.norm() / 0.25).ceil().max(1.0) as usize;
    let b = xi / substeps as f64;
    let mut out = psi.to_vec();
    let mut term = vec![ZERO; n];
    let mut next = vec![ZERO; n];
    for _ in 0..substeps {
        term.copy_from_slice(&out);
        for k in 1..=40 {
            for j in 0..n {
                let mut v = ZERO;
                if j >= 1 {
                    v += b * (j as f64).sqrt() * term[j - 1];
                }
                if j + 1 < n {
                    v -= b.conj() * ((j + 1) as f64).sqrt() * term[j + 1];
                }
                next[j] = v / k as f64;
            }
            std::mem::swap(&mut term, &mut next);
            let mut size = 0.0f64;
            for (o, t) in out.iter_mut().zip(&term) {
                *o += t;
                size = size.max(t.norm());
            }
            if size < 1e-18 {
                break;
            }
        }
    }
    out
}

/// Writes `d rho / d tau` of the truncated master equation into `out`.
pub fn lindblad_rhs<P: CoefficientProfile + ?Sized>(
    rho: &[Complex64],
    dim: usize,
    profile: &P,
    tau: f64,
    out: &mut [Complex64],
) {
    debug_assert_eq!(rho.len(), dim * dim);
    let a = profile.gain_rate(tau);
    let c = profile.loss_rate(tau);
    let root: Vec<f64> = (0..=dim).map(|k| (k as f64).sqrt()).collect();
    // per-level decay: A' (a a^dagger)_kk + C' k, with (a a^dagger)_{N-1,N-1} = 0
    let decay: Vec<f64> = (0..dim)
        .map(|k| {
            let aad = if k + 1 < dim { (k + 1) as f64 } else { 0.0 };
            0.5 * (a * aad + c * k as f64)
        })
        .collect();
    for m in 0..dim {
        let row = &rho[m * dim..(m + 1) * dim];
        let out_row = &mut out[m * dim..(m + 1) * dim];
        for n in 0..dim {
            out_row[n] = -(decay[m] + decay[n]) * row[n];
        }
        if m >= 1 {
            let up = &rho[(m - 1) * dim..m * dim];
            let am = a * root[m];
            for n in 1..dim {
                out_row[n] += am * root[n] * up[n - 1];
            }
        }
        if m + 1 < dim {
            let down = &rho[(m + 1) * dim..(m + 2) * dim];
            let cm = c * root[m + 1];
            for n in 0..dim - 1 {
                out_row[n] += cm * root[n + 1] * down[n + 1];
            }
        }
    }
}

/// Convenience wrapper returning `d rho / d tau` as a matrix.
pub fn lindblad_derivative<P: CoefficientProfile + ?Sized>(
    rho: &DensityMatrix,
    profile: &P,
    tau: f64,
) -> DensityMatrix {
    let mut out = DensityMatrix::zeros(rho.dim);
    lindblad_rhs(&rho.data, rho.dim, profile, tau, &mut out.data);
    out
}

struct MasterEquation<'a, P: ?Sized> {
    dim: usize,
    profile: &'a P,
}

impl<P: CoefficientProfile + ?Sized> ComplexOde for MasterEquation<'_, P> {
    fn dim(&self) -> usize {
        self.dim * self.dim
    }

    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        lindblad_rhs(y, self.dim, self.profile, t, dy);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeakagePolicy {
    /// Stop at the first sample above the threshold.
    Abort,
    /// Keep going and flag the run.
    Record,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub tau_end: f64,
    pub step: f64,
    /// Record moments every this many steps (and always at the end).
    pub sample_every: usize,
    pub leakage_threshold: f64,
    pub leakage_policy: LeakagePolicy,
}

impl EvolveOptions {
    pub fn new(tau_end: f64, step: f64) -> Self {
        Self {
            tau_end,
            step,
            sample_every: 100,
            leakage_threshold: DEFAULT_LEAKAGE_THRESHOLD,
            leakage_policy: LeakagePolicy::Abort,
        }
    }

    pub fn sample_every(mut self, n: usize) -> Self {
        self.sample_every = n.max(1);
        self
    }

    pub fn leakage(mut self, threshold: f64, policy: LeakagePolicy) -> Self {
        self.leakage_threshold = threshold;
        self.leakage_policy = policy;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSample {
    pub tau: f64,
    pub trace_drift: f64,
    pub leakage: f64,
    pub moments: OracleMoments,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub samples: Vec<OracleSample>,
    pub state: DensityMatrix,
    pub tau: f64,
    pub max_trace_drift: f64,
    pub max_leakage: f64,
    pub truncation_unsafe: bool,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("truncation unsafe at tau = {tau}: top-level population {leakage:e}")]
    TruncationUnsafe {
        tau: f64,
        leakage: f64,
        partial: Box<Evolution>,
    },
    #[error("step too large: trace drift {drift:e} at tau = {tau}")]
    StepTooLarge {
        tau: f64,
        drift: f64,
        partial: Box<Evolution>,
    },
}

impl OracleError {
    pub fn partial(&self) -> Option<&Evolution> {
        match self {
            Self::Invalid(_) => None,
            Self::TruncationUnsafe { partial, .. } | Self::StepTooLarge { partial, .. } => Some(partial),
        }
    }
}

/// Largest step the integrator accepts for the given parameters.
pub fn max_step(params: &AmplifierParams) -> f64 {
    1e-3 / params.rate_sum().max(1.0)
}

/// Integrates the master equation from `rho0` over `[0, tau_end]` with
/// fixed classical RK4 steps. The step is shrunk so that the steps tile the
/// interval exactly. Nothing is renormalized; trace drift and leakage are
/// checked at every sample.
pub fn evolve(rho0: &DensityMatrix, params: &AmplifierParams, opts: &EvolveOptions) -> Result<Evolution, OracleError> {
    params.validate()?;
    if !(opts.step > 0.0) || opts.step > max_step(params) * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: opts.step,
            reason: "must be positive and at most 1e-3 / max(A' + 2B', 1)",
        }
        .into());
    }
    evolve_profile(rho0, params, opts)
}

/// [`evolve`] for an arbitrary coefficient profile, without the step bound.
pub fn evolve_profile<P: CoefficientProfile + ?Sized>(
    rho0: &DensityMatrix,
    profile: &P,
    opts: &EvolveOptions,
) -> Result<Evolution, OracleError> {
    if !(opts.tau_end >= 0.0) || !opts.tau_end.is_finite() {
        return Err(Error::Domain {
            what: "tau_end",
            domain: "finite tau >= 0",
            value: opts.tau_end,
        }
        .into());
    }
    let dim = rho0.dim;
    let steps = if opts.tau_end == 0.0 {
        0
    } else {
        step_count(opts.tau_end, opts.step)
    };
    let h = if steps == 0 { 0.0 } else { opts.tau_end / steps as f64 };
    let sys = MasterEquation { dim, profile };
    let mut rk = Rk4::new(sys.dim());
    let mut evo = Evolution {
        samples: Vec::new(),
        state: rho0.clone(),
        tau: 0.0,
        max_trace_drift: 0.0,
        max_leakage: 0.0,
        truncation_unsafe: false,
    };
    let initial_trace = rho0.trace().re;
    let sample = |evo: &mut Evolution, tau: f64| -> Option<OracleError> {
        evo.tau = tau;
        let drift = (evo.state.trace().re - initial_trace).abs();
        let leakage = evo.state.leakage();
        evo.max_trace_drift = evo.max_trace_drift.max(drift);
        evo.max_leakage = evo.max_leakage.max(leakage);
        evo.samples.push(OracleSample {
            tau,
            trace_drift: drift,
            leakage,
            moments: evo.state.moments(),
        });
        if drift > MAX_TRACE_DRIFT {
            return Some(OracleError::StepTooLarge {
                tau,
                drift,
                partial: Box::new(evo.clone()),
            });
        }
        if leakage > opts.leakage_threshold {
            evo.truncation_unsafe = true;
            if opts.leakage_policy == LeakagePolicy::Abort {
                return Some(OracleError::TruncationUnsafe {
                    tau,
                    leakage,
                    partial: Box::new(evo.clone()),
                });
            }
        }
        None
    };
    if let Some(e) = sample(&mut evo, 0.0) {
        return Err(e);
    }
    let every = opts.sample_every.max(1);
    for k in 0..steps {
        let t = k as f64 * h;
        rk.step(&sys, t, h, &mut evo.state.data);
        let done = k + 1;
        if done % every == 0 || done == steps {
            if let Some(e) = sample(&mut evo, done as f64 * h) {
                return Err(e);
            }
        }
    }
    Ok(evo)
}

/// Truncation heuristic: `8 <n>_out + 20` levels.
pub fn suggested_dim(expected_mean_n: f64) -> usize {
    (8.0 * expected_mean_n.max(0.0) + 20.0).ceil() as usize
}

/// Basis size whose top tenth holds less than `threshold` of a geometric
/// (thermal) distribution with mean `peak_mean_n`, and never less than
/// [`suggested_dim`]. Amplified states carry a near-geometric tail, for which
/// the plain heuristic trips the leakage check once `<n>` exceeds a few.
pub fn safe_dim(peak_mean_n: f64, threshold: f64) -> usize {
    let n = peak_mean_n.max(0.0);
    let base = suggested_dim(n);
    if n == 0.0 {
        return base;
    }
    let q = n / (n + 1.0);
    // q^start < threshold with start = 0.9 N
    let start = threshold.ln() / q.ln();
    base.max((start / 0.9).ceil() as usize + 2)
}

/// One point of the scalar moment trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarMoments {
    pub tau: f64,
    pub mean_a: Complex64,
    pub mean_n: f64,
    pub mean_a2: Complex64,
}

struct MomentOde<'a, P: ?Sized>(&'a P);

impl<P: CoefficientProfile + ?Sized> ComplexOde for MomentOde<'_, P> {
    fn dim(&self) -> usize {
        3
    }

    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        let a = self.0.gain_rate(t);
        let w = a - self.0.loss_rate(t);
        dy[0] = y[0] * (0.5 * w);
        dy[1] = y[1] * w + a;
        dy[2] = y[2] * w;
    }
}

/// Integrates the closed equations for `<a>`, `<n>` and `<a^2>` with fixed
/// RK4 steps, returning `samples` evenly spaced points including both ends.
pub fn scalar_moment_ode<P: CoefficientProfile + ?Sized>(
    profile: &P,
    initial: (Complex64, f64, Complex64),
    tau_end: f64,
    step: f64,
    samples: usize,
) -> Result<Vec<ScalarMoments>> {
    crate::amplifier::check_forward_time("tau_end", tau_end)?;
    if !(step > 0.0) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            reason: "must be positive",
        });
    }
    let samples = samples.max(2);
    let intervals = samples - 1;
    let per = if tau_end == 0.0 {
        0
    } else {
        step_count(tau_end / intervals as f64, step)
    };
    let h = if per == 0 {
        0.0
    } else {
        tau_end / (intervals * per) as f64
    };
    let sys = MomentOde(profile);
    let mut rk = Rk4::new(3);
    let mut y = [initial.0, Complex64::new(initial.1, 0.0), initial.2];
    let mut out = Vec::with_capacity(samples);
    let push = |out: &mut Vec<ScalarMoments>, tau: f64, y: &[Complex64; 3]| {
        out.push(ScalarMoments {
            tau,
            mean_a: y[0],
            mean_n: y[1].re,
            mean_a2: y[2],
        })
    };
    push(&mut out, 0.0, &y);
    for i in 0..intervals {
        for k in 0..per {
            let t = (i * per + k) as f64 * h;
            rk.step(&sys, t, h, &mut y);
        }
        push(&mut out, ((i + 1) * per) as f64 * h, &y);
    }
    Ok(out)
}

/// Moment comparison between the oracle and the closed forms at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDelta {
    pub tau: f64,
    pub mean_a: f64,
    pub mean_n: f64,
    pub sym_fluct: f64,
}

/// Machine-readable summary of an oracle run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub params: AmplifierParams,
    pub input: InputField,
    pub dim: usize,
    pub step: f64,
    pub tau_end: f64,
    pub max_trace_drift: f64,
    pub max_leakage: f64,
    pub truncation_unsafe: bool,
    pub moments: Vec<OracleSample>,
    pub analytic_deltas: Vec<AnalyticDelta>,
    pub max_abs_delta: AnalyticDelta,
}

impl OracleReport {
    /// Compares every sample of `evo` against the closed forms. The oracle
    /// works in the interaction picture, so the comparison uses the rotating
    /// frame.
    pub fn build(
        params: &AmplifierParams,
        input: &InputField,
        dim: usize,
        opts: &EvolveOptions,
        evo: &Evolution,
    ) -> Result<Self> {
        let stats = crate::field::FieldStats::new(params.rotating_frame())?;
        let mut deltas = Vec::with_capacity(evo.samples.len());
        let mut worst = AnalyticDelta {
            tau: f64::NAN,
            mean_a: 0.0,
            mean_n: 0.0,
            sym_fluct: 0.0,
        };
        for s in &evo.samples {
            let d = AnalyticDelta {
                tau: s.tau,
                mean_a: (s.moments.mean_a - stats.mean_amplitude(input, s.tau)?).norm(),
                mean_n: s.moments.mean_n - stats.mean_photon_number(input, s.tau)?,
                sym_fluct: s.moments.sym_fluct - stats.output_fluctuations(input, s.tau)?,
            };
            let worse = |a: f64, b: f64| a.abs() > b.abs();
            if worse(d.mean_a, worst.mean_a) || worse(d.mean_n, worst.mean_n) || worse(d.sym_fluct, worst.sym_fluct) {
                worst.tau = d.tau;
            }
            worst.mean_a = if worse(d.mean_a, worst.mean_a) {
                d.mean_a
            } else {
                worst.mean_a
            };
            worst.mean_n = if worse(d.mean_n, worst.mean_n) {
                d.mean_n
            } else {
                worst.mean_n
            };
            worst.sym_fluct = if worse(d.sym_fluct, worst.sym_fluct) {
                d.sym_fluct
            } else {
                worst.sym_fluct
            };
            deltas.push(d);
        }
        Ok(Self {
            params: *params,
            input: *input,
            dim,
            step: opts.step,
            tau_end: evo.tau,
            max_trace_drift: evo.max_trace_drift,
            max_leakage: evo.max_leakage,
            truncation_unsafe: evo.truncation_unsafe,
            moments: evo.samples.clone(),
            analytic_deltas: deltas,
            max_abs_delta: worst,
        })
    }

    /// Largest absolute deviation over `<a>`, `<n>` and `|Delta a|^2`.
    pub fn max_deviation(&self) -> f64 {
        let w = &self.max_abs_delta;
        w.mean_a.abs().max(w.mean_n.abs()).max(w.sym_fluct.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplifier::ConstantRates;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_is_dark_without_gain() {
        let rho = DensityMatrix::vacuum(8);
        let d = lindblad_derivative(&rho, &ConstantRates { gain: 0.0, loss: 1.3 }, 0.0);
        assert!(d.as_slice().iter().all(|z| *z == ZERO));
    }

    #[test]
    fn number_rate_for_single_photon() {
        let rho = DensityMatrix::fock(6, 1).unwrap();
        let rates = ConstantRates { gain: 0.0, loss: 1.0 };
        let d = lindblad_derivative(&rho, &rates, 0.0);
        let dn: f64 = (0..6).map(|k| k as f64 * d[(k, k)].re).sum();
        assert!((dn + 1.0).abs() < 1e-15);
        let rates = ConstantRates { gain: 0.7, loss: 0.2 };
        let d = lindblad_derivative(&rho, &rates, 0.0);
        let dn: f64 = (0..6).map(|k| k as f64 * d[(k, k)].re).sum();
        // W <n> + A with W = A - C
        assert!((dn - (0.5 * 1.0 + 0.7)).abs() < 1e-14);
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity() {
        let p = AmplifierParams::new(0.8, 0.05, 1.0).unwrap();
        let rho = DensityMatrix::squeezed(24, 0.4, 0.7, c(0.5, -0.3));
        for &tau in &[0.0, 1.0, 3.0] {
            let d = lindblad_derivative(&rho, &p, tau);
            assert!(d.trace().norm() < 1e-12);
            assert!(d.hermiticity_error() < 1e-12);
        }
    }

    #[test]
    fn coherent_state_moments() {
        let alpha = c(1.2, -0.7);
        let m = DensityMatrix::coherent(40, alpha).moments();
        assert!((m.mean_a - alpha).norm() < 1e-12);
        assert!((m.mean_a2 - alpha * alpha).norm() < 1e-12);
        assert!((m.sym_fluct - 0.5).abs() < 1e-12);
        assert!(m.mandel_q.unwrap().abs() < 1e-12);
    }

    #[test]
    fn squeezed_state_moments_match_field() {
        let input = InputField::Squeezed {
            r: 0.6,
            phi: 0.9,
            alpha: c(0.8, 0.4),
        };
        let rho = DensityMatrix::from_input(&input, 60).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        let m = rho.moments();
        assert!((m.mean_a - input.mean_a()).norm() < 1e-10);
        assert!((m.mean_n - input.mean_n()).abs() < 1e-10);
        assert!((m.mandel_q.unwrap() - input.mandel_q().unwrap()).abs() < 1e-9);
        let (vs, va) = input.quadrature_variances();
        let axis = input.axis_angle();
        assert!((rho.quadrature_variance(axis) - vs).abs() < 1e-10);
        assert!((rho.quadrature_variance(axis + std::f64::consts::FRAC_PI_2) - va).abs() < 1e-10);
    }

    #[test]
    fn positivity_check() {
        let rho = DensityMatrix::thermal(10, 0.5);
        assert!(rho.is_positive(1e-9));
        let mut bad = rho.clone();
        bad[(3, 3)] = c(-1e-3, 0.0);
        assert!(!bad.is_positive(1e-9));
        assert!(DensityMatrix::coherent(20, c(1.0, 1.0)).is_positive(1e-9));
    }

    #[test]
    fn leakage_counts_top_tenth() {
        let rho = DensityMatrix::fock(30, 27).unwrap();
        assert_eq!(rho.leakage(), 1.0);
        assert_eq!(DensityMatrix::fock(30, 26).unwrap().leakage(), 0.0);
    }

    #[test]
    fn char_fn_and_wigner_of_fock_state() {
        let rho = DensityMatrix::fock(12, 2).unwrap();
        let input = InputField::fock(2);
        for &xi in &[c(0.3, 0.1), c(-0.9, 0.6), c(1.5, 0.0)] {
            assert!((rho.char_fn(xi) - input.char_fn(xi)).norm() < 1e-12);
        }
        // W_n(0) = (2/pi) (-1)^n
        assert!((rho.wigner(ZERO) - 2.0 / std::f64::consts::PI).abs() < 1e-12);
        let vac = DensityMatrix::vacuum(10);
        let a = c(0.4, -0.2);
        let expect = 2.0 / std::f64::consts::PI * (-2.0 * a.norm_sqr()).exp();
        assert!((vac.wigner(a) - expect).abs() < 1e-12);
    }

    #[test]
    fn safe_dim_bounds_thermal_tail() {
        for &n in &[0.5, 3.0, 10.0, 40.0] {
            let dim = safe_dim(n, 1e-6);
            assert!(dim >= suggested_dim(n));
            let rho = DensityMatrix::thermal(dim, n);
            assert!(rho.leakage() < 1e-6, "n={n} dim={dim}");
        }
        assert_eq!(safe_dim(0.0, 1e-6), 20);
    }

    #[test]
    fn evolution_rejects_large_step() {
        let p = AmplifierParams::new(0.5, 0.005, 4.0).unwrap();
        let opts = EvolveOptions::new(1.0, 2e-3);
        assert!(matches!(
            evolve(&DensityMatrix::vacuum(10), &p, &opts),
            Err(OracleError::Invalid(Error::InvalidParameter { name: "step", .. }))
        ));
    }

    #[test]
    fn vacuum_stays_vacuum_without_pump() {
        let rates = ConstantRates { gain: 0.0, loss: 0.5 };
        let evo = evolve_profile(&DensityMatrix::vacuum(8), &rates, &EvolveOptions::new(2.0, 1e-2)).unwrap();
        assert_eq!(evo.state, DensityMatrix::vacuum(8));
        assert_eq!(evo.samples.last().unwrap().tau, 2.0);
    }

    #[test]
    fn overdriven_run_is_flagged() {
        let rates = ConstantRates { gain: 3.0, loss: 0.0 };
        let opts = EvolveOptions::new(3.0, 1e-3).sample_every(10);
        let err = evolve_profile(&DensityMatrix::vacuum(12), &rates, &opts).unwrap_err();
        match err {
            OracleError::TruncationUnsafe { partial, .. } => {
                assert!(partial.truncation_unsafe);
                assert!(partial.tau < 3.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        let opts = opts.leakage(1e-6, LeakagePolicy::Record);
        let evo = evolve_profile(&DensityMatrix::vacuum(12), &rates, &opts).unwrap();
        assert!(evo.truncation_unsafe);
        assert_eq!(evo.tau, 3.0);
    }

    #[test]
    fn scalar_moments_reproduce_constant_rate_results() {
        let rates = ConstantRates { gain: 0.9, loss: 0.4 };
        let t = 3.0;
        let traj = scalar_moment_ode(&rates, (c(1.0, 0.0), 0.0, c(1.0, 0.0)), t, 1e-3, 4).unwrap();
        let last = traj.last().unwrap();
        let g = rates.gain_at(t);
        assert_eq!(traj.len(), 4);
        assert!((last.tau - t).abs() < 1e-12);
        assert!((last.mean_a.re - g.sqrt()).abs() < 1e-11);
        assert!((last.mean_a2.re - g).abs() < 1e-10);
        assert!((last.mean_n - rates.spontaneous_width(t)).abs() < 1e-10);
    }
}
