use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use kappa_core::intersect::{cache, tau};
use kappa_core::kapparing::pairing_matrix;
use kappa_core::partitions::enumerate;
use kappa_core::pushforward::psi_class;

fn bench_tau(c: &mut Criterion) {
    let mut group = c.benchmark_group("tau");
    for (g, exps) in [
        (1u32, vec![2u32, 1, 0]),
        (2, vec![4, 2, 1, 0]),
        (3, vec![5, 3]),
        (3, vec![4, 3, 2, 1]),
    ] {
        let id = format!("g{g}_{exps:?}");
        group.bench_function(BenchmarkId::from_parameter(id), |b| {
            b.iter(|| {
                cache().clear();
                tau(g, black_box(&exps)).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_psi_class(c: &mut Criterion) {
    let mut group = c.benchmark_group("psi_class");
    for d in [4u32, 6, 8] {
        let parts = enumerate(d);
        group.bench_with_input(BenchmarkId::from_parameter(d), &parts, |b, parts| {
            b.iter(|| {
                for p in parts {
                    black_box(psi_class(p, 1, 1).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn bench_rank(c: &mut Criterion) {
    let mut group = c.benchmark_group("pairing_rank");
    group.sample_size(10);
    for (d, g, n) in [(3u32, 1u32, 6u32), (5, 1, 8), (4, 0, 9), (3, 2, 3)] {
        group.bench_function(
            BenchmarkId::from_parameter(format!("d{d}_g{g}_n{n}")),
            |b| b.iter(|| pairing_matrix(d, g, n).unwrap().rank()),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_tau, bench_psi_class, bench_rank);
criterion_main!(benches);
