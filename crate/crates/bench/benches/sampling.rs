use criterion::{black_box, criterion_group, criterion_main, Criterion};
use halfspace_core::analysis::estimate_disagreement;
use halfspace_core::{make_beta_mixture, make_gaussian, make_uniform_ball, sample, Hypothesis, RandomStream};

fn samplers(c: &mut Criterion) {
    let specs = [
        make_gaussian(8).unwrap(),
        make_uniform_ball(8).unwrap(),
        make_beta_mixture(8, 1.0).unwrap(),
    ];
    let mut group = c.benchmark_group("sample 10k d=8");
    for spec in &specs {
        group.bench_function(spec.name(), |b| {
            b.iter(|| sample(black_box(spec), 10_000, &mut RandomStream::new(1, 0)).unwrap())
        });
    }
    group.finish();
}

fn disagreement(c: &mut Criterion) {
    let spec = make_gaussian(8).unwrap();
    let u = Hypothesis::axis(8, 0).unwrap();
    let v = Hypothesis::axis(8, 1).unwrap();
    c.bench_function("estimate_disagreement d=8 n=1e5", |b| {
        b.iter(|| estimate_disagreement(&u, &v, &spec, 100_000, &RandomStream::new(2, 0)).unwrap())
    });
}

criterion_group!(benches, samplers, disagreement);
criterion_main!(benches);
