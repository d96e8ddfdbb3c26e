use betagraph::generator::generate_instance;
use betagraph::{
    digamma, estimate, init_params, iterate_step, sufficient_stats, EstimatorConfig,
    GeneratorConfig,
};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn special(c: &mut Criterion) {
    c.bench_function("digamma", |b| {
        b.iter(|| {
            let mut s = 0.0;
            for k in 1..1000 {
                s += digamma(black_box(k as f64 * 0.013)).unwrap();
            }
            s
        })
    });
}

fn estimator(c: &mut Criterion) {
    let cfg = GeneratorConfig {
        n: 100,
        param_low: 1.0,
        param_high: 5.0,
        seed: 0,
    };
    let stats = sufficient_stats(&generate_instance(&cfg).unwrap().1);
    let start = init_params(&stats).unwrap();
    c.bench_function("iterate_step n=100", |b| {
        b.iter(|| iterate_step(black_box(&start), &stats).unwrap())
    });
    let mut group = c.benchmark_group("estimate");
    group.sample_size(10);
    group.bench_function("n=100", |b| {
        b.iter(|| estimate(black_box(&stats), &EstimatorConfig::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, special, estimator);
criterion_main!(benches);
