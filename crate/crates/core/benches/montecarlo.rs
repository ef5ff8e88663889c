//! Throughput of the Monte Carlo drivers: data-parallel batches (the
//! `parallel` feature, enabled by default) against the sequential reference.
//! Both produce bitwise-identical estimates; this measures what the thread
//! pool buys on the host.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use noma_underlay::analytic::MetricRequest;
use noma_underlay::channel::{AntennaConfig, LinkParams};
use noma_underlay::montecarlo::{simulate, simulate_sequential, McConfig, Metric, Scheme};
use noma_underlay::policy::{PowerSplit, Scenario, Thresholds};

fn request() -> MetricRequest {
    let params = LinkParams::from_distances(30.0, 100.0, 200.0, 2.0).unwrap();
    let antennas = AntennaConfig::new(2, 2).unwrap();
    let split = PowerSplit::from_near_fraction(0.2).unwrap();
    let thresholds = Thresholds::from_rate_target(1.0, &split).unwrap();
    MetricRequest {
        scenario: Scenario::pow_int_icsi(10.0, 1e5).unwrap(),
        params,
        antennas,
        split,
        thresholds,
    }
}

fn bench_drivers(c: &mut Criterion) {
    let req = request();
    let mut group = c.benchmark_group("montecarlo");
    for &trials in &[20_000u64, 200_000] {
        let config = McConfig::new(trials, 1);
        group.throughput(Throughput::Elements(trials));
        group.bench_with_input(
            BenchmarkId::new("simulate", trials),
            &config,
            |b, config| b.iter(|| simulate(&req, Metric::SumRate, Scheme::Noma, config).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("simulate_sequential", trials),
            &config,
            |b, config| {
                b.iter(|| {
                    simulate_sequential(&req, Metric::SumRate, Scheme::Noma, config).unwrap()
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, bench_drivers);
criterion_main!(benches);
