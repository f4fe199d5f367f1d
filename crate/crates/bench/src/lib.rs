//! Shared helpers for the criterion benches.

use dynwalk_core::rng::SampleDraws;
use dynwalk_core::Direction;

/// Deterministic step vector for structure benchmarks.
pub fn random_steps(len: usize, seed: u64) -> Vec<Direction> {
    let draws = SampleDraws::new(seed, 0xBE7C, 0);
    (0..len).map(|i| draws.direction(i as u64)).collect()
}
