//! Reference integrators kept independent of the library's own quadrature.
#![allow(dead_code)]

use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on [-1, 1], Newton on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                let (mut q0, mut q1) = (1.0, z);
                for k in 2..=n {
                    let kf = k as f64;
                    let q2 = ((2.0 * kf - 1.0) * z * q1 - (kf - 1.0) * q0) / kf;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (z * q1 - q0) / (z * z - 1.0);
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dq * dq);
                break;
            }
        }
    }
    (x, w)
}

/// Composite 16-point Gauss-Legendre over `panels` equal panels.
pub fn gl_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(16);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(lo + 0.5 * h * (xi + 1.0));
        }
        total += 0.5 * h * s;
    }
    total
}

/// Wigner density from a characteristic function by direct 2-D Fourier
/// sum, `W(alpha) = pi^-2 int chi(xi) exp(alpha xi* - alpha* xi) d^2 xi`,
/// trapezoid rule on `[-l, l]^2`.
pub fn wigner_by_fourier<F: Fn(Complex64) -> Complex64>(chi: F, alpha: Complex64, l: f64, n: usize) -> f64 {
    let h = 2.0 * l / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..=n {
        for j in 0..=n {
            let xi = Complex64::new(-l + i as f64 * h, -l + j as f64 * h);
            let phase = alpha * xi.conj() - alpha.conj() * xi;
            acc += chi(xi) * phase.exp();
        }
    }
    acc.re * h * h / (std::f64::consts::PI * std::f64::consts::PI)
}
