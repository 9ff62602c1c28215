//! Counting-kernel benchmarks.
//!
//! With the `parallel` feature (default) the same workload runs on a
//! single-thread pool and on all cores, so the speedup of the anchor
//! decomposition is visible directly. Without the feature the kernels
//! are sequential and benched as such.

use boxcorr::{
    count_box_tuples, generate, hinge_sum, star_discrepancy, CorrelationQuery, PointSet,
    SequenceSpec,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn points(n: usize) -> PointSet {
    generate(
        &SequenceSpec::Kronecker {
            alpha: std::f64::consts::SQRT_2,
        },
        n,
    )
    .unwrap()
}

fn workloads() -> Vec<(&'static str, CorrelationQuery)> {
    vec![
        ("pairs", CorrelationQuery::new(2, 0.5, vec![1.0]).unwrap()),
        (
            "triples",
            CorrelationQuery::new(3, 0.5, vec![1.0, 1.0]).unwrap(),
        ),
    ]
}

#[cfg(feature = "parallel")]
fn bench_counting(c: &mut Criterion) {
    let p = points(50_000);
    let expectations: Vec<u128> = workloads()
        .iter()
        .map(|(_, q)| count_box_tuples(&p, q).unwrap())
        .collect();

    let mut group = c.benchmark_group("count_box_tuples");
    group.sample_size(10);
    for (threads, label) in [(1usize, "1-thread"), (num_cpus(), "all-threads")] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        for ((name, q), &expected) in workloads().iter().zip(&expectations) {
            group.bench_with_input(BenchmarkId::new(label, name), q, |b, q| {
                b.iter(|| {
                    let got = pool.install(|| count_box_tuples(&p, q).unwrap());
                    assert_eq!(got, expected);
                    got
                })
            });
        }
    }
    group.finish();
}

#[cfg(feature = "parallel")]
fn num_cpus() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[cfg(not(feature = "parallel"))]
fn bench_counting(c: &mut Criterion) {
    let p = points(50_000);
    let mut group = c.benchmark_group("count_box_tuples");
    group.sample_size(10);
    for (name, q) in workloads() {
        group.bench_with_input(BenchmarkId::new("sequential", name), &q, |b, q| {
            b.iter(|| count_box_tuples(&p, q).unwrap())
        });
    }
    group.finish();
}

fn bench_weighted(c: &mut Criterion) {
    let p = points(20_000);
    let q = CorrelationQuery::new(2, 0.5, vec![1.0]).unwrap();
    let mut group = c.benchmark_group("weighted");
    group.sample_size(10);
    group.bench_function("hinge_sum", |b| b.iter(|| hinge_sum(&p, &q).unwrap()));
    group.finish();
}

fn bench_discrepancy(c: &mut Criterion) {
    let p = points(100_000);
    c.bench_function("star_discrepancy", |b| {
        b.iter(|| star_discrepancy(&p).unwrap())
    });
}

criterion_group!(benches, bench_counting, bench_weighted, bench_discrepancy);
criterion_main!(benches);
