//! Benchmarks along the main pipeline: profile construction, monodromy
//! assembly, and one quasi-periodic eigenvalue solve.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use qcdel_core::bands::{band_eigs, DEFAULT_M};
use qcdel_core::delaunay::solve_delaunay;
use qcdel_core::floquet::{monodromy, FourierMode};
use qcdel_core::make_params;
use std::f64::consts::PI;
use std::hint::black_box;

fn bench_solve(c: &mut Criterion) {
    let params = make_params(6).unwrap();
    c.bench_function("solve_delaunay n6 eps0.5 tol1e-11", |b| {
        b.iter(|| solve_delaunay(black_box(&params), black_box(0.5), 1e-11).unwrap())
    });
}

fn bench_monodromy(c: &mut Criterion) {
    let params = make_params(6).unwrap();
    let profile = solve_delaunay(&params, 0.5, 1e-11).unwrap();
    let mode = FourierMode::new(6, 1);
    c.bench_function("monodromy n6 eps0.5 k1", |b| {
        b.iter_batched(
            || profile.clone(),
            |p| monodromy(black_box(&p), mode, 1e-12).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_band_eigs(c: &mut Criterion) {
    let params = make_params(6).unwrap();
    let profile = solve_delaunay(&params, 0.5, 1e-11).unwrap();
    let mode = FourierMode::new(6, 0);
    c.bench_function("band_eigs n6 eps0.5 k0 phi=pi/2 M64", |b| {
        b.iter(|| band_eigs(black_box(&profile), mode, PI / 2.0, DEFAULT_M).unwrap())
    });
}

criterion_group!(benches, bench_solve, bench_monodromy, bench_band_eigs);
criterion_main!(benches);
