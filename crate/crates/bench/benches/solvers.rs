use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gwd_bench::*;
use gwd_core::classify::{eikonal_matrix, lambda_tensor, null_space};
use gwd_core::einstein::{evolve, solve_colliding, EvolveOptions};
use gwd_core::optics::{solve_hs, RayCoefficients, WaveOptions, WaveformMode};
use gwd_core::ricci::oracle::DEFAULT_STEP;
use gwd_core::ricci::verify::verify_random_plane_polarized;
use gwd_core::variational::action;
use gwd_core::BoundaryMode;

fn einstein(c: &mut Criterion) {
    let (g, data) = pulse_case(33, 17, 17);
    c.bench_function("evolve pulse 33x17x17", |b| b.iter(|| evolve(black_box(&data), &g, &EvolveOptions::default()).unwrap()));
    let (g, data) = colliding_case(65);
    let opts = EvolveOptions { constraint_tolerance: None, ..Default::default() };
    c.bench_function("solve_colliding 65x65", |b| b.iter(|| solve_colliding(black_box(&data), &g, &opts).unwrap()));
}

fn optics(c: &mut Criterion) {
    let (g, data) = hs_case(65);
    let coeffs = RayCoefficients::constant(0.0, 1.0, 0.0);
    c.bench_function("solve_hs 65x65", |b| b.iter(|| solve_hs(black_box(&data), &coeffs, WaveformMode::Localized, &g, &WaveOptions::default()).unwrap()));
}

fn verification(c: &mut Criterion) {
    let mut group = c.benchmark_group("verification");
    group.sample_size(20);
    group.bench_function("ricci point", |b| b.iter(|| verify_random_plane_polarized(1, black_box(7), DEFAULT_STEP).unwrap()));
    let fields = smooth_fields(33);
    group.bench_function("action 33^3", |b| b.iter(|| action(black_box(&fields), BoundaryMode::OneSided).unwrap()));
    group.finish();
}

fn classify(c: &mut Criterion) {
    let sys = scalar_wave();
    let du = [1.5 * 3f64.sqrt(), 1.0, 1.0, 1.0];
    c.bench_function("scalar lambda", |b| {
        b.iter(|| {
            let d = null_space(&eikonal_matrix(&sys, black_box(&[0.5]), &du).unwrap(), 1e-8);
            lambda_tensor(&sys, &[0.5], &du, &d.null_basis).ok()
        })
    });
}

criterion_group!(benches, einstein, optics, verification, classify);
criterion_main!(benches);
