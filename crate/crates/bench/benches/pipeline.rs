use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lrthcr::baseline::{baseline_cmra, nc_music_direct_from_moments};
use lrthcr::solver::solve;
use lrthcr::{estimate_rq, nc_music_spectrum, project_structure, SolverConfig, SolverMode};
use lrthcr_bench::ruler_moments;

fn bench_solver(c: &mut Criterion) {
    let (_, design, m) = ruler_moments(300, 10.0);
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for mode in [SolverMode::Regularized, SolverMode::NoisePlugged, SolverMode::Constrained] {
        let cfg = SolverConfig { mode, ..Default::default() };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &cfg, |b, cfg| {
            b.iter(|| solve(black_box(&m), &design, cfg).unwrap())
        });
    }
    group.bench_function("cmra", |b| {
        b.iter(|| baseline_cmra(black_box(&m), &design, &SolverConfig::default()).unwrap())
    });
    group.finish();
}

fn bench_moments(c: &mut Criterion) {
    let (_, _, m) = ruler_moments(300, 10.0);
    c.bench_function("estimate_rq", |b| b.iter(|| estimate_rq(black_box(&m)).unwrap()));
}

fn bench_retrieval(c: &mut Criterion) {
    let (_, design, m) = ruler_moments(300, 10.0);
    let r_a = solve(&m, &design, &SolverConfig { mode: SolverMode::Regularized, ..Default::default() })
        .unwrap()
        .estimate
        .matrix;
    c.bench_function("project_structure", |b| b.iter(|| project_structure(black_box(&r_a)).unwrap()));
    let mut group = c.benchmark_group("spectrum");
    for step in [1e-3, 1e-4] {
        group.bench_with_input(BenchmarkId::new("nc_music", step), &step, |b, &step| {
            b.iter(|| nc_music_spectrum(black_box(&r_a), 4, step).unwrap())
        });
    }
    group.bench_function("nc_music_direct", |b| {
        b.iter(|| nc_music_direct_from_moments(black_box(&m), &design, 4, 1e-4).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_solver, bench_moments, bench_retrieval);
criterion_main!(benches);
