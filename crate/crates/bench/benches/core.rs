use std::time::Duration;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use sumfree_core::dilation::extract_dilate_exhaustive;
use sumfree_core::harness::{random_set, rng};
use sumfree_core::solver::{max_fraction, max_k_sum_free};
use sumfree_core::sumfree::{is_k_sum_free, is_k_sum_free_naive};
use sumfree_core::{Algorithm, FiniteSet, FolnerGrid, Nat};

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    let mut r = rng(1);
    for size in [10, 20, 40] {
        let a = random_set(&mut r, size, 1_000_000).unwrap();
        group.bench_with_input(BenchmarkId::new("erdos_k2", size), &a, |b, a| {
            b.iter(|| extract_dilate_exhaustive(black_box(a), 2).unwrap())
        });
    }
    group.finish();
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    let budget = Duration::from_secs(60);
    let grid = FolnerGrid::diagonal(3).unwrap();
    group.bench_function("f3_k2", |b| b.iter(|| max_fraction(black_box(&grid), 2, budget).unwrap()));
    let a = FiniteSet::range(1, 24);
    for (name, algo) in [("brute", Algorithm::Brute), ("bb", Algorithm::BranchAndBound)] {
        group.bench_function(BenchmarkId::new("interval_1_24", name), |b| {
            b.iter(|| max_k_sum_free(black_box(&a), 3, algo, budget, false).unwrap())
        });
    }
    group.finish();
}

fn defect(c: &mut Criterion) {
    let mut group = c.benchmark_group("defect");
    let grid = FolnerGrid::diagonal(5).unwrap();
    let a = Nat::from_u64(12);
    group.bench_function("enumerated_f5", |b| b.iter(|| grid.defect(black_box(&a))));
    group.bench_function("closed_form_f5", |b| b.iter(|| grid.defect_closed_form(black_box(&a))));
    group.finish();
}

fn sumfree(c: &mut Criterion) {
    let mut group = c.benchmark_group("sumfree");
    let odds = FiniteSet::from_u64s((1..2000).step_by(2)).unwrap();
    group.bench_function("bitset_odds_k4", |b| b.iter(|| is_k_sum_free(black_box(&odds), 4).unwrap()));
    let small = FiniteSet::from_u64s((1..60).step_by(2)).unwrap();
    group.bench_function("naive_odds_k4", |b| b.iter(|| is_k_sum_free_naive(black_box(&small), 4).unwrap()));
    group.finish();
}

criterion_group!(benches, sweep, solver, defect, sumfree);
criterion_main!(benches);
