use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use stratpref_bench::{rng, sample, tied_sample};
use stratpref_core::stats::{
    exact_perm_oracle, kruskal_wallis, rank_sum, signed_rank, spearman, RANK_SUM_EXACT_THRESHOLD,
};

fn wilcoxon(c: &mut Criterion) {
    let mut group = c.benchmark_group("rank_sum");
    let mut r = rng(1);
    for n in [6usize, 8, 50, 1000] {
        let a = sample(&mut r, n, 0.0);
        let b = sample(&mut r, n, 0.1);
        group.bench_with_input(BenchmarkId::from_parameter(2 * n), &(a, b), |bench, (a, b)| {
            bench.iter(|| rank_sum(black_box(a), black_box(b), RANK_SUM_EXACT_THRESHOLD).unwrap())
        });
    }
    group.finish();

    let a = tied_sample(&mut r, 6);
    let b = tied_sample(&mut r, 6);
    c.bench_function("exact_perm_oracle/12_tied", |bench| {
        bench.iter(|| exact_perm_oracle(black_box(&a), black_box(&b)).unwrap())
    });

    let mut group = c.benchmark_group("signed_rank");
    for n in [20usize, 1000] {
        let d = sample(&mut r, n, -0.4);
        group.bench_with_input(BenchmarkId::from_parameter(n), &d, |bench, d| {
            bench.iter(|| signed_rank(black_box(d)).unwrap())
        });
    }
    group.finish();
}

fn rank_tests(c: &mut Criterion) {
    let mut r = rng(2);
    let groups: Vec<Vec<f64>> = (0..3).map(|_| tied_sample(&mut r, 1800)).collect();
    c.bench_function("kruskal_wallis/3x1800", |bench| bench.iter(|| kruskal_wallis(black_box(&groups)).unwrap()));

    let x = sample(&mut r, 5400, 0.0);
    let y = sample(&mut r, 5400, 0.0);
    c.bench_function("spearman/5400", |bench| bench.iter(|| spearman(black_box(&x), black_box(&y)).unwrap()));
}

criterion_group!(benches, wilcoxon, rank_tests);
criterion_main!(benches);
