//! Seed derivation and per-run random streams.
//!
//! Every run owns disjoint generator streams for the adversary's reward
//! table, the policy's internal randomness, action sampling, and observation
//! noise. Streams are counter-addressed, so results do not depend on worker
//! scheduling, and the adversary stream never observes policy randomness.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers within one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamId {
    Adversary = 0,
    Policy = 1,
    Sampling = 2,
    Noise = 3,
}

/// SplitMix64 finalizer; maps `(seed, index)` to a well-mixed derived seed.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for run `run_index` under a base experiment seed.
pub fn run_seed(seed: u64, run_index: u64) -> u64 {
    seed ^ run_index
}

/// Generator for one stream of one run.
pub fn stream_rng(run_seed: u64, stream: StreamId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    rng.set_stream(stream as u64);
    rng
}

/// Inverse-CDF sample from a distribution; rounding shortfall falls through
/// to the last index.
pub fn sample_index(p: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        cum += pi;
        if u < cum {
            return i;
        }
    }
    p.len() - 1
}
