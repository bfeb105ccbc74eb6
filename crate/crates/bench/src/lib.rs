//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stratpref_core::game::builtin_game;
use stratpref_core::measurement::{run_sweep, Dataset, MockBackend, SweepOptions};
use stratpref_core::promptgen::expand_all;
use stratpref_core::{MockProfile, PopulationSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` continuous draws, shifted by `shift`.
pub fn sample(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() + shift).collect()
}

/// `n` draws from a handful of values, so ranks tie heavily.
pub fn tied_sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| f64::from(rng.random_range(0..5u8))).collect()
}

/// A complete mock sweep of `game` with a population of `size`.
pub fn mock_dataset(game: &str, size: u32) -> Dataset {
    let spec = builtin_game(game).expect("built-in game");
    let backend = MockBackend::new(MockProfile::noisy_population_agent(0.1, 0.05, 1), "bench", 1);
    let instances = expand_all(&spec).expect("expands");
    run_sweep(&backend, &PopulationSpec::new(size, 0.1, 1), &instances, &SweepOptions::new("bench"), None)
        .expect("mock sweep")
}
