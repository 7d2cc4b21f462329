use adiabat_core::closed::{integrate_schrodinger, track_spectrum};
use adiabat_core::numkit::{c, expm, identity, jordan_decompose, sigma_x, sigma_y, sigma_z, ComplexMatrix};
use adiabat_core::ode::Tolerances;
use adiabat_core::open::{build_supermatrix, jordan_track, JordanTrackOptions};
use adiabat_core::schedules::{make_model, uniform_grid};
use criterion::{black_box, criterion_group, criterion_main, Criterion};
use serde_json::json;

fn bench_expm(cr: &mut Criterion) {
    let h = sigma_x() * c(0.3, 0.0) + sigma_y() * c(-1.1, 0.0) + sigma_z() * c(0.7, 0.0);
    let h4 = h.kronecker(&identity(2)) + identity(2).kronecker(&sigma_z());
    cr.bench_function("expm 2x2", |b| b.iter(|| expm(black_box(&(&h * c(0.0, -5.0)))).unwrap()));
    cr.bench_function("expm 4x4", |b| b.iter(|| expm(black_box(&(&h4 * c(0.0, -5.0)))).unwrap()));
}

fn bench_supermatrix(cr: &mut Criterion) {
    let h = sigma_x() * c(0.5, 0.0) + sigma_z() * c(0.2, 0.0);
    let g = sigma_z() * c(0.1f64.sqrt(), 0.0);
    cr.bench_function("supermatrix qubit", |b| {
        b.iter(|| build_supermatrix(black_box(&h), std::slice::from_ref(&g)).unwrap())
    });
}

fn bench_jordan(cr: &mut Criterion) {
    let mut j = ComplexMatrix::zeros(4, 4);
    for (k, l) in [0.5, 0.5, 0.5, -0.3].iter().enumerate() {
        j[(k, k)] = c(*l, 0.0);
    }
    j[(0, 1)] = c(1.0, 0.0);
    j[(1, 2)] = c(1.0, 0.0);
    let p = identity(4) + ComplexMatrix::from_fn(4, 4, |r, s| c(0.1 * (r as f64 - s as f64), 0.05 * (r + s) as f64));
    let m = &p * j * p.clone().try_inverse().unwrap();
    cr.bench_function("jordan J3+J1", |b| b.iter(|| jordan_decompose(black_box(&m), 1e-4, 1e-9).unwrap()));

    let spec = make_model("dephasing_qubit", &json!({"omega": 1.0, "gamma": 0.2})).unwrap();
    let grid = uniform_grid(101).unwrap();
    cr.bench_function("jordan track dephasing 101", |b| {
        b.iter(|| jordan_track(black_box(&spec), &grid, &JordanTrackOptions::default()).unwrap())
    });
}

fn bench_schrodinger(cr: &mut Criterion) {
    let spec = make_model("landau_zener", &json!({"a": 1.0, "delta": 0.25})).unwrap();
    let grid = uniform_grid(201).unwrap();
    let track = track_spectrum(&spec, &grid, 1e-10).unwrap();
    let psi0 = track.vector(0, 0);
    let tol = Tolerances::new(1e-10, 1e-8).unwrap();
    cr.bench_function("schrodinger LZ T=100", |b| {
        b.iter(|| integrate_schrodinger(black_box(&spec), 100.0, &psi0, &grid, &tol).unwrap())
    });
    cr.bench_function("track spectrum LZ 201", |b| b.iter(|| track_spectrum(black_box(&spec), &grid, 1e-10).unwrap()));
}

criterion_group!(benches, bench_expm, bench_supermatrix, bench_jordan, bench_schrodinger);
criterion_main!(benches);
