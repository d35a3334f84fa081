use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use qamp_core::noise::{delta, integral_i};
use qamp_core::oracle::{lindblad_rhs, DensityMatrix};
use qamp_core::phase_space::{wigner_coherent, GridSpec};
use qamp_core::AmplifierParams;
use std::hint::black_box;

fn noise_kernel(c: &mut Criterion) {
    c.bench_function("integral_i a'=0.5 x=3", |b| {
        b.iter(|| integral_i(black_box(0.5), black_box(3.0)).unwrap())
    });
    let p = AmplifierParams::new(0.5, 0.005, 4.0).unwrap();
    c.bench_function("delta tau=8", |b| {
        b.iter(|| delta(black_box(&p), black_box(8.0)).unwrap())
    });
}

fn master_equation(c: &mut Criterion) {
    let p = AmplifierParams::new(0.5, 0.005, 4.0).unwrap();
    let rho = DensityMatrix::coherent(60, Complex64::new(2.0, 0.0));
    let mut out = vec![Complex64::new(0.0, 0.0); 60 * 60];
    c.bench_function("lindblad_rhs N=60", |b| {
        b.iter(|| lindblad_rhs(black_box(rho.as_slice()), 60, &p, black_box(3.0), &mut out))
    });
}

fn grids(c: &mut Criterion) {
    let p = AmplifierParams::new(0.5, 0.005, 4.0).unwrap();
    let alpha = Complex64::new(3.0, 1.0);
    let spec = GridSpec::square(alpha, 8.0, 256);
    c.bench_function("wigner_coherent 256x256", |b| {
        b.iter(|| wigner_coherent(&p, alpha, black_box(6.0), Some(spec)).unwrap())
    });
}

criterion_group!(benches, noise_kernel, master_equation, grids);
criterion_main!(benches);
