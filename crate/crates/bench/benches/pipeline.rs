use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use stratpref_bench::mock_dataset;
use stratpref_core::analysis::td_elimination;
use stratpref_core::experiment::{analyze, AnalysisOptions};
use stratpref_core::game::{builtin_game, TdGame};
use stratpref_core::promptgen::expand_all;

fn prompts(c: &mut Criterion) {
    let spec = builtin_game("value_rank").unwrap();
    c.bench_function("expand_all/value_rank", |b| b.iter(|| expand_all(black_box(&spec)).unwrap()));
}

fn sweep_and_analyze(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    group.bench_function("mock_sweep/value_rank_n20", |b| b.iter(|| mock_dataset("value_rank", 20)));

    let spec = builtin_game("value_rank").unwrap();
    let ds = mock_dataset("value_rank", 50);
    group.bench_function("analyze/value_rank_n50", |b| {
        b.iter(|| analyze(black_box(&ds), std::slice::from_ref(&spec), "bench", 1, AnalysisOptions::default()).unwrap())
    });
    group.finish();
}

fn elimination(c: &mut Criterion) {
    let game = TdGame::new(2, 100, 2).unwrap();
    let mut group = c.benchmark_group("td_elimination");
    group.sample_size(10);
    group.bench_function("2..=100", |b| b.iter(|| td_elimination(black_box(&game))));
    group.finish();
}

criterion_group!(benches, prompts, sweep_and_analyze, elimination);
criterion_main!(benches);
