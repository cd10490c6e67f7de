use agler_bench::{points, problem};
use agler_core::{
    agler_feasibility, minimal_norm, normalized_grammian, szego_gram, transfer_eval, Colligation,
    TestFunctionFamily,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn feasibility(c: &mut Criterion) {
    let mut group = c.benchmark_group("agler_feasibility");
    let disc = TestFunctionFamily::disc();
    let bidisc = TestFunctionFamily::polydisc(2).unwrap();
    let g2 = TestFunctionFamily::g2(16).unwrap();
    for n in [4, 16, 64] {
        let p = problem(&disc, n, 0.9, 1);
        group.bench_with_input(BenchmarkId::new("disc", n), &p, |b, p| {
            b.iter(|| agler_feasibility(black_box(p)))
        });
    }
    for n in [4, 8, 16] {
        let p = problem(&bidisc, n, 0.9, 2);
        group.bench_with_input(BenchmarkId::new("bidisc", n), &p, |b, p| {
            b.iter(|| agler_feasibility(black_box(p)))
        });
    }
    let p = problem(&g2, 6, 0.9, 3);
    group.bench_function("g2/6", |b| b.iter(|| agler_feasibility(black_box(&p))));
    group.finish();
}

fn min_norm(c: &mut Criterion) {
    let disc = TestFunctionFamily::disc();
    let p = problem(&disc, 8, 1.3, 4);
    c.bench_function("minimal_norm/disc/8", |b| {
        b.iter(|| minimal_norm(p.points(), p.targets(), p.family(), 1e-7).unwrap())
    });
}

fn grammian(c: &mut Criterion) {
    let mut group = c.benchmark_group("normalized_grammian");
    let disc = TestFunctionFamily::disc();
    for n in [16, 64, 256] {
        let k = szego_gram(&points(&disc, n, 5)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &k, |b, k| {
            b.iter(|| normalized_grammian(black_box(k)).unwrap())
        });
    }
    group.finish();
}

fn transfer(c: &mut Criterion) {
    let mut group = c.benchmark_group("transfer_eval");
    let bidisc = TestFunctionFamily::polydisc(2).unwrap();
    let x = points(&bidisc, 1, 6).points()[0].clone();
    for state in [2, 8, 32] {
        let col = Colligation::random(&bidisc, state, 1, 7).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(state), &col, |b, col| {
            b.iter(|| transfer_eval(col, black_box(&x)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, feasibility, min_norm, grammian, transfer);
criterion_main!(benches);
