use std::sync::Arc;

use conic_bench::equilateral;
use conic_core::liouville::{build_background_on_mesh, build_mesh, cone_positions, uniformize, BaseSurface, SolverOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn solve(c: &mut Criterion) {
    let spec = equilateral(-0.8);
    let mut group = c.benchmark_group("uniformize_equilateral");
    group.sample_size(10);
    for level in [2, 3] {
        let options = SolverOptions { mesh_level: level, grading_rings: 24, ..Default::default() };
        group.bench_with_input(BenchmarkId::from_parameter(level), &options, |b, o| b.iter(|| uniformize(&spec, o).unwrap()));
    }
    group.finish();
    let options = SolverOptions { mesh_level: 3, grading_rings: 24, ..Default::default() };
    let mesh = Arc::new(build_mesh(BaseSurface::RoundSphere, &cone_positions(&spec).unwrap(), &options.mesh()).unwrap());
    let mut group = c.benchmark_group("background");
    group.sample_size(10);
    group.bench_function("level3", |b| b.iter(|| build_background_on_mesh(&spec, mesh.clone()).unwrap()));
    group.finish();
}

criterion_group!(benches, solve);
criterion_main!(benches);
