use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use superscs::cones::{project_cone, ConeKind};
use superscs::{LinSolveCache, LinSysMode, SolverParams};
use superscs_bench::fixtures;

fn solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for f in fixtures() {
        for (label, params) in [
            ("aa5", SolverParams::anderson(5)),
            ("rb50", SolverParams::broyden(50)),
            ("km", SolverParams::km()),
        ] {
            let params = SolverParams { max_time: 30.0, ..params };
            group.bench_with_input(BenchmarkId::new(label, f.name), &f.problem, |b, p| {
                b.iter(|| superscs::solve(black_box(p), &params, None).unwrap())
            });
        }
    }
    group.finish();
}

fn factor(c: &mut Criterion) {
    let mut group = c.benchmark_group("factor");
    for f in fixtures() {
        group.bench_with_input(BenchmarkId::from_parameter(f.name), &f.problem, |b, p| {
            b.iter(|| LinSolveCache::init(black_box(p), LinSysMode::Direct).unwrap())
        });
    }
    group.finish();
}

fn projections(c: &mut Criterion) {
    let x: Vec<f64> = (0..55).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3).collect();
    let mut group = c.benchmark_group("project");
    group.bench_function("psd10", |b| b.iter(|| project_cone(black_box(&x), ConeKind::Psd(10)).unwrap()));
    group.bench_function("soc55", |b| b.iter(|| project_cone(black_box(&x), ConeKind::SecondOrder(55)).unwrap()));
    group.bench_function("exp", |b| b.iter(|| project_cone(black_box(&x[..3]), ConeKind::ExpPrimal).unwrap()));
    group.finish();
}

criterion_group!(benches, solve, factor, projections);
criterion_main!(benches);
