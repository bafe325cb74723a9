//! Throughput of the data-parallel paths on the global rayon pool versus a
//! single-thread pool. Build with `--no-default-features` to measure the
//! sequential fallback instead.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use faultcurve::collector;
use faultcurve::fitting::{self, FitConfig};
use faultcurve::harness::{self, DynSubject, SessionConfig};
use faultcurve::models::ModelId;
use rayon::ThreadPoolBuilder;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    vec![
        ("all_threads", ThreadPoolBuilder::new().num_threads(threads).build().unwrap()),
        ("one_thread", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
    ]
}

fn throughput(c: &mut Criterion) {
    let dist = collector::geometric_distribution(8, 0.4, 10.0).unwrap();
    let curve = collector::simulate_detection_curve(&dist, 100_000, 10, 0).unwrap().into_aggregate();
    let cfg = FitConfig::default();
    let subjects = harness::builtin_subjects(true);
    let refs: Vec<&dyn DynSubject> = subjects.iter().map(|s| s.as_ref()).collect();
    let session_cfg = SessionConfig { draws: 5000, ..SessionConfig::default() };

    let mut group = c.benchmark_group("throughput");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new("rank_phi_models", name), |b| {
            b.iter(|| pool.install(|| fitting::rank_models(&curve, &ModelId::PHI, ModelId::Phi5, &cfg).unwrap()))
        });
        group.bench_function(BenchmarkId::new("harness_sessions", name), |b| {
            b.iter(|| pool.install(|| harness::run_sessions(&refs, 8, &session_cfg).unwrap()))
        });
        group.bench_function(BenchmarkId::new("simulate_curve", name), |b| {
            b.iter(|| pool.install(|| collector::simulate_detection_curve(&dist, 100_000, 4096, 1).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, throughput);
criterion_main!(benches);
