use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dnmf_bench::{assignment_weights, Fixture};
use dnmf_core::dnmf::{bdnmf_step, cdnmf_step, nmf_step, sdnmf_step};
use dnmf_core::eval::max_weight_assignment;
use dnmf_core::mbn::{mbn_transform, MbnConfig};
use std::hint::black_box;

fn solver_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for &(words, docs) in &[(500, 200), (2000, 1000)] {
        let fx = Fixture::new(words, docs, 10, 0.05, 7);
        let id = format!("{words}x{docs}");
        group.bench_with_input(BenchmarkId::new("nmf", &id), &fx, |b, fx| {
            b.iter(|| nmf_step(black_box(&fx.c), &fx.w, &fx.d).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("bdnmf", &id), &fx, |b, fx| {
            b.iter(|| bdnmf_step(black_box(&fx.c), &fx.d, &fx.f).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sdnmf", &id), &fx, |b, fx| {
            b.iter(|| sdnmf_step(black_box(&fx.c), &fx.t, &fx.d, &fx.f).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("cdnmf", &id), &fx, |b, fx| {
            b.iter(|| {
                cdnmf_step(
                    black_box(&fx.c),
                    &fx.w,
                    &fx.t_square,
                    &fx.d,
                    &fx.f,
                    1.0,
                    1e-3,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn mbn(c: &mut Criterion) {
    let mut group = c.benchmark_group("mbn");
    group.sample_size(10);
    for &docs in &[200, 600] {
        let fx = Fixture::new(500, docs, 5, 0.05, 11);
        let cfg = MbnConfig {
            clusterings: 50,
            delta: 0.5,
            topics: 5,
            seed: 3,
            ..MbnConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(docs), &fx, |b, fx| {
            b.iter(|| mbn_transform(black_box(&fx.d), &cfg).unwrap())
        });
    }
    group.finish();
}

fn hungarian(c: &mut Criterion) {
    let mut group = c.benchmark_group("hungarian");
    for &n in &[10, 50, 200] {
        let w = assignment_weights(n, 5);
        group.bench_with_input(BenchmarkId::from_parameter(n), &w, |b, w| {
            b.iter(|| max_weight_assignment(black_box(w)))
        });
    }
    group.finish();
}

criterion_group!(benches, solver_steps, mbn, hungarian);
criterion_main!(benches);
