use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use wicktorus::counting::{fix12_oracle, fix12_strip, fix13_annulus, fix13_oracle};
use wicktorus::randomfield::sup_norm;
use wicktorus::spectral::{evolve, wick_fast, wick_oracle, Scheme};
use wicktorus_bench::{field, query};

fn counting(c: &mut Criterion) {
    let mut g = c.benchmark_group("counting");
    for scale in [16u64, 64, 256] {
        let (q, a, b) = query(scale);
        g.bench_with_input(BenchmarkId::new("fix12_strip", scale), &scale, |bch, _| {
            bch.iter(|| fix12_strip(black_box(a), black_box(b), &q))
        });
        g.bench_with_input(BenchmarkId::new("fix12_oracle", scale), &scale, |bch, _| {
            bch.iter(|| fix12_oracle(black_box(a), black_box(b), &q))
        });
        g.bench_with_input(BenchmarkId::new("fix13_annulus", scale), &scale, |bch, _| {
            bch.iter(|| fix13_annulus(black_box(a), black_box(b), &q))
        });
        g.bench_with_input(BenchmarkId::new("fix13_oracle", scale), &scale, |bch, _| {
            bch.iter(|| fix13_oracle(black_box(a), black_box(b), &q))
        });
    }
    g.finish();
}

fn wick(c: &mut Criterion) {
    let mut g = c.benchmark_group("wick");
    for scale in [4u64, 8] {
        let u = field(scale);
        g.bench_with_input(BenchmarkId::new("fast", scale), &u, |b, u| b.iter(|| wick_fast(u)));
        g.bench_with_input(BenchmarkId::new("oracle", scale), &u, |b, u| {
            b.iter(|| wick_oracle(u, u, u, None).unwrap())
        });
    }
    for scale in [32u64, 128] {
        let u = field(scale);
        g.bench_with_input(BenchmarkId::new("fast", scale), &u, |b, u| b.iter(|| wick_fast(u)));
    }
    g.finish();
}

fn flow(c: &mut Criterion) {
    let mut g = c.benchmark_group("flow");
    g.sample_size(10);
    let u = field(32);
    // ten steps
    g.bench_function("rk4if_N32_10_steps", |b| {
        b.iter(|| evolve(&u, 1e-4, 1e-3, Scheme::Rk4If).unwrap())
    });
    let u = field(64);
    g.bench_function("sup_norm_N64", |b| b.iter(|| sup_norm(&u, 4).unwrap()));
    g.finish();
}

criterion_group!(benches, counting, wick, flow);
criterion_main!(benches);
