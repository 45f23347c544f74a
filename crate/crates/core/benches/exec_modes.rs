//! Sequential against parallel execution on the heavier suites.
//!
//! Build with `--no-default-features` to compile out rayon; `Exec::Parallel` then runs
//! sequentially too.

use badgame::diophantine::ConstructionParams;
use badgame::par::Exec;
use badgame::suites;
use badgame::ExponentPair;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_rational::BigRational;

fn exec_modes(c: &mut Criterion) {
    let params = ConstructionParams::defaults(&BigRational::new(1.into(), 2.into())).unwrap();
    let pairs = [ExponentPair::from_parts(1, 2, 3).unwrap()];
    let mut group = c.benchmark_group("exec_modes");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        let name = format!("{exec:?}").to_lowercase();
        group.bench_with_input(BenchmarkId::new("attachment_q60", &name), &exec, |b, &exec| {
            b.iter(|| suites::attachment(60, &pairs, exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("strip_counts_k1", &name), &exec, |b, &exec| {
            b.iter(|| suites::strip_counts(&params, 1, 200, 1, exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("grid_property", &name), &exec, |b, &exec| {
            b.iter(|| suites::grid_property(&params, 1_000, 1, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, exec_modes);
criterion_main!(benches);
