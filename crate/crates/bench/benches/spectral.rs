use std::hint::black_box;

use conic_core::mode_spectral::{solve_spectrum, verify_eigenvalue_bound, ModeEigenproblem};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn spectra(c: &mut Criterion) {
    let mut group = c.benchmark_group("football_mode1");
    for cells in [128, 256, 512] {
        let problem = ModeEigenproblem::football(-0.5, 1.0, 1, cells).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(cells), &problem, |b, p| b.iter(|| solve_spectrum(black_box(p), 4)));
    }
    group.finish();
    c.bench_function("eigenvalue_bound/modes0-4", |b| {
        b.iter(|| verify_eigenvalue_bound(black_box(-0.5), 1.0, &[0, 1, 2, 3, 4], 256))
    });
}

criterion_group!(benches, spectra);
criterion_main!(benches);
