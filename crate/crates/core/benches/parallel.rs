use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use himm::exit_costs::compute_exit_tables_with;
use himm::flat::flatten_with;
use himm::generators::{gen_recursive, gen_warehouse, WarehouseParams};
use himm::planner::plan_batch;
use himm::{compute_exit_tables, NodeId, Parallelism};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)];

fn exit_tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("exit_tables");
    group.sample_size(10);
    for depth in [12, 16] {
        let h = gen_recursive(depth).unwrap();
        for (name, par) in MODES {
            group.bench_with_input(BenchmarkId::new(name, depth), &h, |b, h| {
                b.iter(|| compute_exit_tables_with(black_box(h), par).unwrap())
            });
        }
    }
    group.finish();
}

fn flatten(c: &mut Criterion) {
    let mut group = c.benchmark_group("flatten");
    group.sample_size(10);
    let h = gen_recursive(16).unwrap();
    for (name, par) in MODES {
        group.bench_function(name, |b| b.iter(|| flatten_with(black_box(&h), par)));
    }
    group.finish();
}

fn batch_queries(c: &mut Criterion) {
    let mut group = c.benchmark_group("plan_batch");
    group.sample_size(10);
    let h = gen_warehouse(&WarehouseParams::default()).unwrap();
    let table = compute_exit_tables(&h).unwrap();
    let leaves: Vec<NodeId> = h.leaves().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let queries: Vec<_> = (0..256)
        .map(|_| (leaves[rng.random_range(0..leaves.len())], leaves[rng.random_range(0..leaves.len())]))
        .collect();
    for (name, par) in MODES {
        group.bench_function(name, |b| b.iter(|| plan_batch(&h, &table, black_box(&queries), par)));
    }
    group.finish();
}

criterion_group!(benches, exit_tables, flatten, batch_queries);
criterion_main!(benches);
