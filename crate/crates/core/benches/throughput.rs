use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use gegenbauer_markov::gegenbauer::{build_operator, GegenbauerParam, ProblemSize};
use gegenbauer_markov::par::Execution;
use gegenbauer_markov::verifier::sweep::{sweep, GridSpec};

fn sweep_strategies(c: &mut Criterion) {
    let grid = GridSpec::new(
        GridSpec::n_range(3, 120, 1).unwrap(),
        vec![-0.25, 0.0, 0.5, 1.0, 2.0, 10.0],
    );
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| b.iter(|| sweep(black_box(&grid), exec).unwrap()));
    }
    group.finish();
}

fn matvec(c: &mut Criterion) {
    let lambda = GegenbauerParam::new(0.5).unwrap();
    let mut group = c.benchmark_group("matvec");
    for n in [64usize, 256, 1024, 4096] {
        let op = build_operator(ProblemSize::new(n).unwrap(), lambda).unwrap();
        let dense = op.to_dense().unwrap();
        let x: Vec<f64> = (0..op.dim()).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let mut y = vec![0.0; op.dim()];
        group.bench_with_input(BenchmarkId::new("implicit", n), &x, |b, x| {
            b.iter(|| op.apply(black_box(x), &mut y).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dense", n), &x, |b, x| {
            b.iter(|| dense.matvec(black_box(x)))
        });
    }
    group.finish();
}

criterion_group!(benches, sweep_strategies, matvec);
criterion_main!(benches);
