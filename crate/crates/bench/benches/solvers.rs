use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fiberspec_core::eigensolve::factorize_spd;
use fiberspec_core::fem_assembly::assemble_mode_pencil;
use fiberspec_core::limit_spectrum::{limit_eigenvalues, mean_u0_closed};
use fiberspec_core::special_functions::{bessel_j0, bessel_j1, BesselZeroTable};
use fiberspec_core::{generate_mesh, smallest_eigenpairs, CellGeometry, DispersionParams, LanczosOptions};

fn special(c: &mut Criterion) {
    let xs: Vec<f64> = (0..1000).map(|i| 0.04 * i as f64).collect();
    c.bench_function("bessel_j0_j1_1000", |b| {
        b.iter(|| xs.iter().map(|&x| bessel_j0(black_box(x)) + bessel_j1(x)).sum::<f64>())
    });
    c.bench_function("j0_zeros_500", |b| {
        b.iter(|| BesselZeroTable::new().first(black_box(500)))
    });
    c.bench_function("mean_u0_closed", |b| {
        b.iter(|| mean_u0_closed(black_box(40.0), 0.25).unwrap())
    });
}

fn limit(c: &mut Criterion) {
    let params = DispersionParams::new(CellGeometry::default(), 500).unwrap();
    c.bench_function("limit_roots_50", |b| {
        b.iter(|| limit_eigenvalues(black_box(&params), 50).unwrap())
    });
}

fn solvers(c: &mut Criterion) {
    let geometry = CellGeometry::default();
    let mut group = c.benchmark_group("mode_pencil");
    group.sample_size(10);
    for n_div in [16, 32, 64] {
        let mesh = generate_mesh(&geometry, n_div).unwrap();
        let pencil = assemble_mode_pencil(&mesh, 0.1, std::f64::consts::PI.powi(2)).unwrap();
        group.bench_with_input(BenchmarkId::new("mesh", n_div), &n_div, |b, &n| {
            b.iter(|| generate_mesh(&geometry, black_box(n)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("cholesky", n_div), &pencil, |b, p| {
            b.iter(|| factorize_spd(black_box(&p.k)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("lanczos_k8", n_div), &pencil, |b, p| {
            b.iter(|| smallest_eigenpairs(black_box(&p.k), &p.m, 8, LanczosOptions::default().tol).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, special, limit, solvers);
criterion_main!(benches);
