use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vus_bench::series;
use vus_core::curves::{auc_roc, sweep_curve};
use vus_core::range_auc::r_auc_roc;
use vus_core::vus::vus;
use vus_core::{BufferGrid, ThresholdGrid, VusImpl};

fn vus_implementations(c: &mut Criterion) {
    let s = series(10_000);
    let grid = ThresholdGrid::uniform(ThresholdGrid::DEFAULT_INTERVALS).unwrap();
    let mut group = c.benchmark_group("vus");
    group.sample_size(10);
    for max_buffer in [10, 100] {
        let buffers = BufferGrid::up_to(max_buffer);
        for which in [VusImpl::Naive, VusImpl::Opt, VusImpl::OptMem] {
            group.bench_with_input(
                BenchmarkId::new(which.name(), max_buffer),
                &buffers,
                |b, g| b.iter(|| vus(&s, &grid, g, which).unwrap()),
            );
        }
    }
    group.finish();
}

fn single_buffer_measures(c: &mut Criterion) {
    let s = series(10_000);
    let grid = ThresholdGrid::uniform(ThresholdGrid::DEFAULT_INTERVALS).unwrap();
    let mut group = c.benchmark_group("auc");
    group.sample_size(20);
    group.bench_function("auc_roc", |b| b.iter(|| auc_roc(&sweep_curve(&s, &grid))));
    group.bench_function("r_auc_roc", |b| b.iter(|| r_auc_roc(&s, &grid, 10)));
    group.finish();
}

criterion_group!(benches, vus_implementations, single_buffer_measures);
criterion_main!(benches);
