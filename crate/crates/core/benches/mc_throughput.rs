//! Sequential vs data-parallel throughput of the Monte Carlo estimator and
//! the exact moment enumeration. Build with `--no-default-features` to
//! compile the parallel path out entirely.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use haartv::density::BlockSpec;
use haartv::numerics::Workers;
use haartv::tvlab::tv_estimate;
use haartv::wick::{Enumeration, Oracle, TraceMomentQuery};

fn worker_settings() -> [(&'static str, Workers); 2] {
    [
        ("sequential", Workers::SEQUENTIAL),
        ("parallel", Workers::AUTO),
    ]
}

fn tv(c: &mut Criterion) {
    let samples = 20_000;
    let mut group = c.benchmark_group("tv_estimate");
    group.sample_size(10);
    group.throughput(Throughput::Elements(samples as u64));
    for (n, p, q) in [(1000u64, 5u64, 5u64), (1600, 20, 20)] {
        let spec = BlockSpec::new(n, p, q).unwrap();
        for (name, workers) in worker_settings() {
            group.bench_with_input(
                BenchmarkId::new(name, format!("{n}x{p}x{q}")),
                &spec,
                |b, &spec| b.iter(|| tv_estimate(spec, samples, 1, workers).unwrap()),
            );
        }
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("trace_moment");
    group.sample_size(10);
    for (strategy, query) in [
        (Enumeration::Direct, TraceMomentQuery::new(4, 3, 4).unwrap()),
        (
            Enumeration::Orbits,
            TraceMomentQuery::new(60, 2, 5).unwrap(),
        ),
    ] {
        for (name, workers) in worker_settings() {
            let oracle = Oracle {
                workers,
                ..Oracle::with_strategy(strategy)
            };
            group.bench_function(BenchmarkId::new(name, format!("{strategy:?}")), |b| {
                b.iter(|| oracle.trace_moment(query).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, tv, oracle);
criterion_main!(benches);
