use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use knotchord::optimizer::{maximize, objective_grad, perturbed_circle};
use knotchord::shape::{fit_conic, width_ratio};
use knotchord::OptimizeOptions;
use knotchord_bench::fixtures;

fn gradient(c: &mut Criterion) {
    let (_, curve) = fixtures(256).swap_remove(1);
    c.bench_function("objective_grad N=256 p=3.5", |b| {
        b.iter(|| objective_grad(black_box(&curve), 3.5).unwrap())
    });
}

fn ascent(c: &mut Criterion) {
    let opts = OptimizeOptions {
        n: 128,
        max_iters: 50,
        ..OptimizeOptions::default()
    };
    let init = perturbed_circle(opts.n, opts.perturb, 3).unwrap();
    let mut group = c.benchmark_group("maximize");
    group.sample_size(10);
    group.bench_function("50 iterations N=128 p=4", |b| {
        b.iter(|| maximize(4.0, black_box(&init), &opts).unwrap())
    });
    group.finish();
}

fn shape(c: &mut Criterion) {
    let (_, curve) = fixtures(256).swap_remove(1);
    c.bench_function("fit_conic N=256", |b| b.iter(|| fit_conic(black_box(&curve)).unwrap()));
    c.bench_function("width_ratio N=256 m=360", |b| b.iter(|| width_ratio(black_box(&curve), 360).unwrap()));
}

criterion_group!(benches, gradient, ascent, shape);
criterion_main!(benches);
