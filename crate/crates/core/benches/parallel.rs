//! Sequential vs data-parallel throughput on the two hot loops: grid
//! sieving of initial candidates and the direct per-prime scan.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qnrnp_core::pipeline::{direct_scan, sieve_initial_list, GridSearch, PipelineConfig};

fn config(workers: usize) -> PipelineConfig {
    PipelineConfig {
        workers,
        ..PipelineConfig::default()
    }
}

fn bench_grid_sieve(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid_sieve_omega13_slice");
    // a 2^17-candidate slice of the omega=13 flagship grid
    let d = 40_112_098_026u64;
    let lo = 304_000_000_000_000u64;
    let hi = lo + (1u64 << 17) * d;
    for workers in [1usize, 0] {
        let label = if workers == 1 { "sequential" } else { "parallel" };
        group.bench_with_input(BenchmarkId::from_parameter(label), &workers, |b, &w| {
            b.iter(|| {
                let grid = GridSearch::new(13, d, lo, hi);
                sieve_initial_list(&grid, &config(w))
            })
        });
    }
    group.finish();
}

fn bench_direct_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("direct_scan_to_2e6");
    group.sample_size(10);
    for workers in [1usize, 0] {
        let label = if workers == 1 { "sequential" } else { "parallel" };
        group.bench_with_input(BenchmarkId::from_parameter(label), &workers, |b, &w| {
            b.iter(|| direct_scan(2, 2_000_000, (1, 64), 2, &config(w)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_grid_sieve, bench_direct_scan);
criterion_main!(benches);
