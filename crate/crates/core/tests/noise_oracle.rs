//! Gain and noise kernel against reference quadratures computed here from
//! the defining integrals.

mod common;

use common::gl_integrate;
use proptest::prelude::*;
use qamp_core::noise::{
    asymptotic_added_noise, caves_limit, integral_i, integral_i_asymptote, integral_i_closed, integral_i_closed_even,
    integral_i_closed_odd, NoiseKernel,
};
use qamp_core::AmplifierParams;

fn gain_by_quadrature(p: &AmplifierParams, tau: f64) -> f64 {
    let w = |s: f64| p.a_prime * (s - p.tau0).tanh();
    gl_integrate(w, 0.0, tau, 64).exp()
}

/// `Delta = G(tau) int_0^tau (A'(s) + C'(s)) / (2 G(s)) ds` with `G` itself
/// obtained by quadrature of the gain factor.
fn delta_by_double_integral(p: &AmplifierParams, tau: f64) -> f64 {
    let g_tau = gain_by_quadrature(p, tau);
    let inner = |s: f64| {
        let rates = p.coeff_a(s) + p.coeff_c(s);
        0.5 * rates / gain_by_quadrature(p, s)
    };
    g_tau * gl_integrate(inner, 0.0, tau, 48)
}

#[test]
fn gain_matches_quadrature_of_gain_factor() {
    for &(a, t0) in &[(0.05, 0.0), (0.5, 4.0), (2.0, 5.0), (5.5, 5.0)] {
        let p = AmplifierParams::new(a, 0.01, t0).unwrap();
        for &tau in &[0.3, 1.0, t0, 2.0 * t0 + 1.5, 20.0] {
            let want = gain_by_quadrature(&p, tau);
            let got = p.gain(tau).unwrap();
            assert!(
                (got / want - 1.0).abs() < 1e-11,
                "a={a} t0={t0} tau={tau}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn delta_matches_double_integral() {
    for &(a, b, t0) in &[
        (1.0, 0.0, 0.0),
        (0.5, 0.005, 4.0),
        (0.05, 0.1, 2.0),
        (3.0, 0.01, 5.0),
        (2.5, 1.0, 1.0),
        // deep in the damping phase, where G int G^-1 is a tiny remainder
        (4.85, 0.0, 7.8),
        (5.5, 0.055, 8.0),
    ] {
        let p = AmplifierParams::new(a, b, t0).unwrap();
        let k = NoiseKernel::new(p).unwrap();
        for &tau in &[0.5, 2.0, t0 + 0.7, 2.0 * t0, 2.0 * t0 + 4.0] {
            if tau == 0.0 {
                continue;
            }
            let want = delta_by_double_integral(&p, tau);
            let got = k.delta(tau).unwrap();
            assert!(
                (got - want).abs() < 1e-9 * want.max(1.0),
                "{a} {b} {t0} {tau}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn delta_before_the_switch_at_large_gain() {
    // 50-digit quadrature of (A' + 2B')/2 G(tau) int_0^tau G^-1
    let cases = [
        (
            4.850205551793567,
            0.0,
            7.818800970694294,
            0.336_544_265_507_179_2,
            0.402_261_267_918_019_2,
        ),
        (5.5, 0.055, 8.0, 1.0, 0.507_916_359_963_926_4),
        (2.0, 0.2, 8.0, 3.0, 0.598_539_853_773_965_8),
    ];
    for (a, b, t0, tau, want) in cases {
        let p = AmplifierParams::new(a, b, t0).unwrap();
        let got = NoiseKernel::new(p).unwrap().delta(tau).unwrap();
        assert!((got / want - 1.0).abs() < 1e-10, "{a} {t0} {tau}: {got} vs {want}");
    }
}

#[test]
fn integral_i_matches_reference_quadrature() {
    for &a in &[0.01, 0.05, 0.5, 1.0, 2.7, 5.5] {
        for &x in &[0.1, 1.0, 3.0, 10.0] {
            let want = gl_integrate(|u: f64| u.cosh().powf(-a), 0.0, x, 200);
            let got = integral_i(a, x).unwrap();
            assert!((got / want - 1.0).abs() < 1e-11, "a={a} x={x}");
            assert_eq!(integral_i(a, -x).unwrap(), -got);
        }
    }
}

#[test]
fn closed_forms_match_reference_quadrature() {
    for m in 1..=5u32 {
        for &x in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let even = gl_integrate(|u: f64| u.cosh().powi(-2 * m as i32), 0.0, x, 200);
            let odd = gl_integrate(|u: f64| u.cosh().powi(-(2 * m as i32 + 1)), 0.0, x, 200);
            assert!((integral_i_closed_even(m, x).unwrap() / even - 1.0).abs() < 1e-12);
            assert!((integral_i_closed_odd(m, x).unwrap() / odd - 1.0).abs() < 1e-12);
            assert_eq!(
                integral_i_closed(2 * m, x).unwrap(),
                integral_i_closed_even(m, x).unwrap()
            );
        }
    }
}

#[test]
fn asymptote_is_the_long_time_limit() {
    for &a in &[0.3, 1.0, 4.0] {
        let far = gl_integrate(|u: f64| u.cosh().powf(-a), 0.0, 400.0 / a, 4000);
        assert!((integral_i_asymptote(a).unwrap() / far - 1.0).abs() < 1e-10);
    }
}

#[test]
fn added_noise_approaches_its_asymptote() {
    let p = AmplifierParams::from_occupation(1.0, 0.2, 0.0).unwrap();
    let k = NoiseKernel::new(p).unwrap();
    let late = k.added_noise(40.0).unwrap();
    let want = asymptotic_added_noise(1.0, 0.2).unwrap();
    assert!((late - want).abs() < 1e-12 * want);
    assert!((asymptotic_added_noise(1e-4, 0.0).unwrap() / caves_limit(0.0) - 1.0).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gain_returns_to_one_after_twice_the_inversion_time(a in 0.01f64..6.0, t0 in 0.0f64..8.0) {
        let p = AmplifierParams::new(a, 0.0, t0).unwrap();
        prop_assert!((p.gain(2.0 * t0).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((p.gain(t0).unwrap() / t0.cosh().powf(-a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spontaneous_width_is_nonnegative(a in 0.01f64..6.0, b in 0.0f64..2.0, t0 in 0.0f64..8.0, f in 0.0f64..1.0) {
        let p = AmplifierParams::new(a, b, t0).unwrap();
        let tau = f * (2.0 * t0 + 6.0);
        let r = NoiseKernel::new(p).unwrap().record(tau).unwrap();
        prop_assert!(r.m_width >= -1e-12 * (1.0 + r.gain));
        // Delta >= |G - 1| / 2 since |W| <= A' + 2B'
        prop_assert!(r.delta >= 0.5 * (r.gain - 1.0).abs() * (1.0 - 1e-10) - 1e-14);
    }

    #[test]
    fn integral_i_is_increasing_and_bounded(a in 0.05f64..6.0, x in 0.0f64..20.0, dx in 0.01f64..2.0) {
        let lo = integral_i(a, x).unwrap();
        let hi = integral_i(a, x + dx).unwrap();
        prop_assert!(hi >= lo * (1.0 - 1e-15));
        prop_assert!(hi <= integral_i_asymptote(a).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn noise_starts_at_zero(a in 0.01f64..6.0, b in 0.0f64..2.0, t0 in 0.0f64..8.0) {
        let r = NoiseKernel::new(AmplifierParams::new(a, b, t0).unwrap()).unwrap().record(0.0).unwrap();
        prop_assert_eq!(r.delta, 0.0);
        prop_assert_eq!(r.gain, 1.0);
    }
}
