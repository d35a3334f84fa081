//! Truncated-Fock master-equation runs against the closed-form statistics.

use num_complex::Complex64;
use qamp_core::field::FieldStats;
use qamp_core::oracle::{
    evolve, safe_dim, scalar_moment_ode, DensityMatrix, EvolveOptions, LeakagePolicy, OracleReport,
};
use qamp_core::{AmplifierParams, InputField};

fn canonical() -> AmplifierParams {
    AmplifierParams::new(0.5, 0.005, 4.0).unwrap()
}

/// Largest `<n>` along the closed-form trajectory, for sizing the basis.
fn peak_mean_n(p: &AmplifierParams, input: &InputField, tau_end: f64) -> f64 {
    let stats = FieldStats::new(*p).unwrap();
    (0..=100)
        .map(|i| stats.mean_photon_number(input, tau_end * i as f64 / 100.0).unwrap())
        .fold(0.0, f64::max)
}

fn run(p: &AmplifierParams, input: &InputField, dim: usize, tau_end: f64, step: f64) -> qamp_core::oracle::Evolution {
    let rho0 = DensityMatrix::from_input(input, dim).unwrap();
    evolve(&rho0, p, &EvolveOptions::new(tau_end, step).sample_every(250)).unwrap()
}

#[test]
fn evolution_matches_closed_forms_at_heuristic_truncation() {
    let p = canonical();
    let stats = FieldStats::new(p).unwrap();
    let inputs = [
        InputField::coherent(2.0, 0.0),
        InputField::fock(5),
        InputField::thermal(1.0),
        InputField::Squeezed {
            r: 0.5,
            phi: 0.6,
            alpha: Complex64::new(0.5, 0.3),
        },
    ];
    for input in &inputs {
        let dim = safe_dim(peak_mean_n(&p, input, 8.0), 1e-6);
        let evo = run(&p, input, dim, 8.0, 1e-3);
        assert!(!evo.truncation_unsafe);
        assert!(evo.max_trace_drift < 1e-9, "{input:?}: drift {}", evo.max_trace_drift);
        assert!(evo.state.hermiticity_error() < 1e-12);
        assert!(evo.state.is_positive(1e-9));
        for s in &evo.samples {
            let want = stats.moments(input, s.tau).unwrap();
            let got = &s.moments;
            let tag = format!("{} at tau={}", input.kind(), s.tau);
            assert!((got.mean_a - want.mean_a).norm() < 1e-4, "{tag}");
            assert!(
                (got.mean_n - want.mean_n).abs() < 1e-4,
                "{tag}: {} vs {}",
                got.mean_n,
                want.mean_n
            );
            assert!((got.sym_fluct - want.sym_fluct).abs() < 1e-4, "{tag}");
            let axis = input.axis_angle();
            let vu = evo_quadrature(got, axis);
            let vv = evo_quadrature(got, axis + std::f64::consts::FRAC_PI_2);
            assert!((vu - want.var_u).abs() < 1e-4, "{tag}: {vu} vs {}", want.var_u);
            assert!((vv - want.var_v).abs() < 1e-4, "{tag}");
            if let (Some(q), Some(w)) = (got.mandel_q, want.mandel_q) {
                assert!((q - w).abs() < 1e-4, "{tag}: Q {q} vs {w}");
            }
        }
    }
}

fn evo_quadrature(m: &qamp_core::oracle::OracleMoments, angle: f64) -> f64 {
    let rot = Complex64::from_polar(1.0, -angle);
    let mean = (m.mean_a * rot).re;
    (m.mean_a2 * rot * rot).re + m.mean_n + 0.5 - 2.0 * mean * mean
}

#[test]
fn thermal_occupation_after_a_full_cycle() {
    let p = canonical();
    let input = InputField::thermal(1.0);
    let evo = run(&p, &input, safe_dim(7.0, 1e-6), 8.0, 1e-3);
    let delta = qamp_core::noise::delta(&p, 8.0).unwrap();
    assert!((evo.samples.last().unwrap().moments.mean_n - (1.0 + delta)).abs() < 1e-4);
}

#[test]
fn scalar_moments_match_closed_forms() {
    for &(a, b, t0) in &[(0.5, 0.005, 4.0), (2.0, 0.1, 5.0), (0.05, 0.01, 0.0)] {
        let p = AmplifierParams::new(a, b, t0).unwrap();
        let stats = FieldStats::new(p).unwrap();
        let a0 = Complex64::new(1.5, -0.5);
        let traj = scalar_moment_ode(&p, (a0, 0.0, a0 * a0), 2.0 * t0 + 3.0, 1e-3, 21).unwrap();
        for s in &traj {
            let g = p.gain(s.tau).unwrap();
            let nr = stats.noise(s.tau).unwrap();
            assert!((s.mean_a - a0 * g.sqrt()).norm() < 1e-8);
            assert!((s.mean_a2 - a0 * a0 * g).norm() < 1e-8 * g.max(1.0));
            assert!(
                (s.mean_n - nr.m_width).abs() < 1e-8 * nr.m_width.max(1.0),
                "{} {}",
                s.mean_n,
                nr.m_width
            );
        }
    }
}

#[test]
fn matrix_and_scalar_moments_agree() {
    let p = canonical();
    let alpha = Complex64::new(2.0, 0.0);
    let evo = run(&p, &InputField::Coherent { alpha }, 180, 8.0, 1e-3);
    let traj = scalar_moment_ode(&p, (alpha, 4.0, alpha * alpha), 8.0, 1e-3, 33).unwrap();
    for s in &traj {
        let m = evo
            .samples
            .iter()
            .find(|o| (o.tau - s.tau).abs() < 1e-9)
            .expect("sample grids line up")
            .moments;
        assert!((m.mean_a - s.mean_a).norm() < 1e-6);
        assert!((m.mean_n - s.mean_n).abs() < 1e-6);
    }
}

#[test]
fn doubling_the_basis_changes_nothing() {
    let p = AmplifierParams::new(0.5, 0.005, 2.0).unwrap();
    let input = InputField::coherent(1.0, 0.5);
    let dim = safe_dim(peak_mean_n(&p, &input, 4.0), 1e-6);
    let small = run(&p, &input, dim, 4.0, 1e-3);
    let large = run(&p, &input, 2 * dim, 4.0, 1e-3);
    for (a, b) in small.samples.iter().zip(&large.samples) {
        assert!((a.moments.mean_a - b.moments.mean_a).norm() < 1e-6);
        assert!((a.moments.mean_n - b.moments.mean_n).abs() < 1e-6);
        assert!((a.moments.sym_fluct - b.moments.sym_fluct).abs() < 1e-6);
    }
}

#[test]
fn halving_the_step_changes_nothing() {
    // truncation does not matter here, only the time discretization
    let p = canonical();
    let rho0 = DensityMatrix::from_input(&InputField::fock(3), 60).unwrap();
    let evolve_with = |step: f64, every: usize| {
        let opts = EvolveOptions::new(8.0, step)
            .sample_every(every)
            .leakage(1.0, LeakagePolicy::Record);
        evolve(&rho0, &p, &opts).unwrap()
    };
    let coarse = evolve_with(1e-3, 250);
    let fine = evolve_with(5e-4, 500);
    for (a, b) in coarse.samples.iter().zip(&fine.samples) {
        assert_eq!(a.tau, b.tau);
        assert!((a.moments.mean_n - b.moments.mean_n).abs() < 1e-8);
        assert!((a.moments.mandel_q.unwrap() - b.moments.mandel_q.unwrap()).abs() < 1e-8);
    }
}

#[test]
fn runs_are_bit_reproducible() {
    let p = canonical();
    let input = InputField::thermal(0.5);
    let a = run(&p, &input, 40, 2.0, 1e-3);
    let b = run(&p, &input, 40, 2.0, 1e-3);
    assert_eq!(a, b);
}

#[test]
fn report_summarizes_the_run() {
    let p = canonical();
    let input = InputField::coherent(1.0, 0.0);
    let opts = EvolveOptions::new(2.0, 1e-3).sample_every(500);
    let evo = evolve(&DensityMatrix::from_input(&input, 60).unwrap(), &p, &opts).unwrap();
    let report = OracleReport::build(&p, &input, 60, &opts, &evo).unwrap();
    assert_eq!(report.moments.len(), 5);
    assert_eq!(report.analytic_deltas.len(), 5);
    assert!(report.max_deviation() < 1e-8);
    let json = serde_json::to_value(&report).unwrap();
    assert!(json["max_trace_drift"].is_number());
}
