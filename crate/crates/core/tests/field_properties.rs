//! Invariants of the output statistics over random parameter cells.

use num_complex::Complex64;
use proptest::prelude::*;
use qamp_core::field::{squeezing_gain_bound, FieldStats};
use qamp_core::thermal::{entropy_from_occupation, ThermalState, ThermalTrack};
use qamp_core::{AmplifierParams, InputField};

fn cell() -> impl Strategy<Value = AmplifierParams> {
    (0.01f64..5.0, 0.0f64..0.1, 0.0f64..8.0)
        .prop_map(|(a, nb, t0)| AmplifierParams::from_occupation(a, nb, t0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sub_poissonian_light_needs_gain_below_two(p in cell(), n0 in 1u32..30, f in 0.0f64..1.0) {
        let stats = FieldStats::new(p).unwrap();
        let tau = 1e-3 + f * (2.0 * p.tau0 + 6.0);
        let q = stats.mandel_q(&InputField::fock(n0), tau).unwrap();
        if q < 0.0 {
            prop_assert!(p.gain(tau).unwrap() < 2.0 + 1e-9);
        }
    }

    #[test]
    fn retained_squeezing_needs_gain_below_two(p in cell(), r in 0.05f64..3.0, phi in 0.0f64..6.0, f in 0.0f64..1.0) {
        let stats = FieldStats::new(p).unwrap();
        let tau = f * (2.0 * p.tau0 + 6.0);
        let input = InputField::Squeezed { r, phi, alpha: Complex64::new(0.3, -0.2) };
        if stats.squeezing_retained(&input, tau).unwrap().retained {
            prop_assert!(p.gain(tau).unwrap() < 2.0 + 1e-9);
        }
    }

    #[test]
    fn coherent_noise_never_decreases(p in cell(), f in 0.0f64..1.0, df in 1e-3f64..0.5) {
        let stats = FieldStats::new(p).unwrap();
        let input = InputField::coherent(1.0, 2.0);
        let tau = f * (2.0 * p.tau0 + 6.0);
        let a = stats.output_fluctuations(&input, tau).unwrap();
        let b = stats.output_fluctuations(&input, tau + df).unwrap();
        // the true increase can sit below the 1e-10 quadrature tolerance
        prop_assert!(b >= a * (1.0 - 1e-9));
    }

    #[test]
    fn squeezing_bound_matches_direct_test(a in 0.01f64..3.0, nb in 0.0f64..0.1, r in 0.1f64..2.0, tau in 0.01f64..6.0) {
        let p = AmplifierParams::from_occupation(a, nb, 0.0).unwrap();
        let stats = FieldStats::new(p).unwrap();
        let retained = stats.squeezing_retained(&InputField::squeezed_vacuum(r), tau).unwrap().retained;
        let bound = squeezing_gain_bound(&p, r, tau).unwrap();
        let g = p.gain(tau).unwrap();
        // skip cells sitting on the boundary
        prop_assume!((g / bound - 1.0).abs() > 1e-9);
        prop_assert_eq!(retained, g < bound);
    }

    #[test]
    fn thermal_record_is_consistent(p in cell(), nbar in 0.01f64..1e3, f in 0.0f64..1.0) {
        let track = ThermalTrack::new(p, ThermalState::dimensionless(nbar).unwrap()).unwrap();
        let tau = f * 20.0;
        let rec = track.record(tau).unwrap();
        prop_assert!(rec.mean_n > 0.0);
        prop_assert!(rec.entropy >= 0.0);
        prop_assert_eq!(rec.entropy, entropy_from_occupation(rec.mean_n));
        // higher occupation means higher temperature
        let hotter = track.state().temperature_of(rec.mean_n * 1.01).unwrap();
        prop_assert!(hotter > rec.temperature);
    }
}

#[test]
fn vacuum_input_has_no_mandel_parameter_at_start() {
    let stats = FieldStats::new(AmplifierParams::new(1.0, 0.0, 0.0).unwrap()).unwrap();
    assert!(stats.mandel_q(&InputField::coherent(0.0, 0.0), 0.0).is_err());
    assert!(stats.mandel_q(&InputField::coherent(0.0, 0.0), 0.5).unwrap() > 0.0);
}

#[test]
fn late_entropy_grows_linearly() {
    for &a in &[0.05, 0.5, 1.0, 2.0] {
        let p = AmplifierParams::from_occupation(a, 10.0, 8.0).unwrap();
        let track = ThermalTrack::new(p, ThermalState::dimensionless(10.0).unwrap()).unwrap();
        let taus: Vec<f64> = (0..=40).map(|i| 10.0 + 0.1 * i as f64).collect();
        let s: Vec<f64> = taus.iter().map(|&t| track.entropy(t).unwrap()).collect();
        // least-squares line through the samples
        let n = taus.len() as f64;
        let (mt, ms) = (taus.iter().sum::<f64>() / n, s.iter().sum::<f64>() / n);
        let sxy: f64 = taus.iter().zip(&s).map(|(t, y)| (t - mt) * (y - ms)).sum();
        let sxx: f64 = taus.iter().map(|t| (t - mt).powi(2)).sum();
        let slope = sxy / sxx;
        let rise = slope * (taus[taus.len() - 1] - taus[0]);
        let worst = taus
            .iter()
            .zip(&s)
            .map(|(t, y)| (y - (ms + slope * (t - mt))).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.02 * rise.abs(), "a={a}: residual {worst} vs rise {rise}");
    }
}

#[test]
fn temperature_starts_at_input_value() {
    let p = AmplifierParams::from_occupation(1.0, 1e3, 8.0).unwrap();
    let state = ThermalState::kelvin(1e3, 1e14).unwrap();
    let track = ThermalTrack::new(p, state).unwrap();
    let t_in = state.temperature_of(1e3).unwrap();
    assert!((track.temperature(0.0).unwrap() / t_in - 1.0).abs() < 1e-12);
}
