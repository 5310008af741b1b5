//! Throughput comparison of the data-parallel hot paths against a
//! single-thread pool: replica sampling and nested contour quadrature.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use corners::contour::{integrate_nested, plan_contours, QuadratureSettings};
use corners::finite_moments::ModelParams;
use corners::sampler::{sample_corners, GibbsSettings, McmcSettings, RngStream};

fn replica_batch(replicas: usize) {
    let params = ModelParams::new(6.0, 12, 1.0).unwrap();
    let stream = RngStream::new(9, 0);
    let vals = corners::parallel::map_indexed(replicas, |r| {
        let mut rng = stream.substream(r as u64).rng();
        let s = sample_corners(
            6,
            1,
            &params,
            &mut rng,
            &McmcSettings::default(),
            &GibbsSettings::default(),
        )
        .unwrap();
        s.p_k_diff(6, 1).unwrap()
    });
    assert_eq!(vals.len(), replicas);
}

fn nested_quadrature() {
    let fam = plan_contours(&[-1.0, 0.0], &[3.0], &[Complex64::new(0.0, 0.0)], 3).unwrap();
    let settings = QuadratureSettings::default()
        .with_initial(16)
        .with_tols(1e-9, 1e-11);
    let v = integrate_nested(
        |u| {
            let d01 = u[0] - u[1];
            let d12 = u[1] - u[2];
            1.0 / (d01 * d12 * (u[0] + 0.5) * (u[1] + 1.0) * (u[2] + 0.25))
        },
        &fam,
        &settings,
    )
    .unwrap();
    assert!(v.norm().is_finite());
}

fn bench_threads(c: &mut Criterion) {
    let max_threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let mut group = c.benchmark_group("replica_batch");
    group.sample_size(10);
    for threads in [1usize, max_threads] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, _| {
            b.iter(|| pool.install(|| replica_batch(64)));
        });
    }
    group.finish();

    let mut group = c.benchmark_group("nested_quadrature");
    group.sample_size(10);
    for threads in [1usize, max_threads] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, _| {
            b.iter(|| pool.install(nested_quadrature));
        });
    }
    group.finish();
}

criterion_group!(benches, bench_threads);
criterion_main!(benches);
