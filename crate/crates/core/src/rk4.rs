//! Classical fixed-step fourth-order Runge-Kutta over complex state vectors.
//!
//! Fixed steps keep every run bit-reproducible for a given step size.

use num_complex::Complex64;

pub trait ComplexOde {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]);
}

pub struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); dim];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    pub fn step<S: ComplexOde>(&mut self, sys: &S, t: f64, h: f64, y: &mut [Complex64]) {
        debug_assert_eq!(y.len(), self.k1.len());
        let half = 0.5 * h;
        sys.rhs(t, y, &mut self.k1);
        for ((tmp, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *tmp = yi + k * half;
        }
        sys.rhs(t + half, &self.tmp, &mut self.k2);
        for ((tmp, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *tmp = yi + k * half;
        }
        sys.rhs(t + half, &self.tmp, &mut self.k3);
        for ((tmp, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *tmp = yi + k * h;
        }
        sys.rhs(t + h, &self.tmp, &mut self.k4);
        let sixth = h / 6.0;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * sixth;
        }
    }
}

/// Number of fixed steps covering `[0, span]` with step at most `max_step`.
pub fn step_count(span: f64, max_step: f64) -> usize {
    ((span / max_step) - 1e-9).ceil().max(1.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rotation;

    impl ComplexOde for Rotation {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[Complex64], dy: &mut [Complex64]) {
            dy[0] = Complex64::new(-0.5, 1.0) * y[0];
        }
    }

    fn solve(h: f64) -> Complex64 {
        let mut y = vec![Complex64::new(1.0, 0.0)];
        let mut rk = Rk4::new(1);
        let n = step_count(2.0, h);
        let h = 2.0 / n as f64;
        for i in 0..n {
            rk.step(&Rotation, i as f64 * h, h, &mut y);
        }
        y[0]
    }

    #[test]
    fn fourth_order_convergence() {
        let exact = (Complex64::new(-0.5, 1.0) * 2.0).exp();
        let e1 = (solve(0.1) - exact).norm();
        let e2 = (solve(0.05) - exact).norm();
        let ratio = e1 / e2;
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn step_count_covers_span() {
        assert_eq!(step_count(8.0, 1e-4), 80_000);
        assert_eq!(step_count(1.0, 0.3), 4);
    }
}
