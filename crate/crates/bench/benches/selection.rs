use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ivm_bench::synthetic_graph;
use ivm_core::bmc::iga;
use ivm_core::{IgaMode, SampleKind, SamplePool, Sampler};

fn greedy_selection(c: &mut Criterion) {
    let mut group = c.benchmark_group("greedy_selection");
    group.sample_size(20);
    let g = synthetic_graph(20_000, 3, 1);
    let consts = g.compute_constants();
    let sampler = Sampler::new(&g, &consts);
    let mut pool = SamplePool::new(SampleKind::Importance, 7, g.n());
    pool.extend(&g, &consts, &sampler, 50_000).unwrap();
    for budget in [100.0f64, 1000.0] {
        group.bench_with_input(
            BenchmarkId::new("lazy", budget as u64),
            &budget,
            |b, &budget| b.iter(|| iga(&pool, &g, &consts, budget, IgaMode::Lazy).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, greedy_selection);
criterion_main!(benches);
