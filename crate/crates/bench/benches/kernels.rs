use std::hint::black_box;

use b2p1_bench::{field, grid, model, state};
use b2p1_core::oracle::derive::derive_scalar_equation;
use b2p1_core::{Regime, Spectral};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn spectral(c: &mut Criterion) {
    let mut grp = c.benchmark_group("spectral");
    for n in [64, 128, 256] {
        let g = grid(n);
        let sp = Spectral::new(g);
        let u = field(g);
        grp.bench_with_input(BenchmarkId::new("deriv_xy", n), &n, |b, _| {
            b.iter(|| sp.deriv(black_box(&u), 1, 1))
        });
        grp.bench_with_input(BenchmarkId::new("product", n), &n, |b, _| {
            b.iter(|| sp.product(black_box(&u), &u))
        });
    }
    grp.finish();
}

fn stepping(c: &mut Criterion) {
    let mut grp = c.benchmark_group("rk4_step");
    grp.sample_size(20);
    for r in [Regime::Case1, Regime::Case2] {
        let m = model(128, r);
        let s = state(*m.spectral().grid());
        grp.bench_function(BenchmarkId::new(r.name(), 128), |b| {
            b.iter(|| m.step(black_box(&s)))
        });
    }
    grp.finish();
}

fn oracle(c: &mut Criterion) {
    c.bench_function("derive_case1", |b| {
        b.iter(|| derive_scalar_equation(black_box(Regime::Case1)))
    });
}

criterion_group!(benches, spectral, stepping, oracle);
criterion_main!(benches);
