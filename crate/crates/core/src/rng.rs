//! Seed plumbing shared by the process sampler and the Monte Carlo
//! estimators.
//!
//! Two named schemes, both recorded in run manifests:
//!
//! * `"chacha8/splitmix64-v1"`: refresh timelines. Index `n` of a
//!   realization gets its own ChaCha8 stream seeded by a splitmix64 chain
//!   on `(seed, n)`, so a timeline is a pure function of `(seed, n)` and
//!   huge-`N` experiments never materialize unused indices.
//! * `"splitmix64-counter-v1"`: estimator walks. Draw `c` of sample `i`
//!   is `splitmix64(base(seed, op, i) + c)`. Stateless, so samples can be
//!   evaluated in any order or in parallel with identical results, and
//!   two-time couplings can share per-step randomness exactly.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// PRNG identity string for realization sampling.
pub const PROCESS_PRNG: &str = "chacha8/splitmix64-v1";
/// PRNG identity string for estimator sampling.
pub const ESTIMATOR_PRNG: &str = "splitmix64-counter-v1";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function (Steele, Lea, Flood 2014).
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for stream `stream` of master seed `seed`.
#[inline]
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ stream.wrapping_mul(GOLDEN))
}

/// Per-index generator for refresh timelines.
pub fn index_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(seed, index as u64))
}

/// Counter-based draws for one estimator sample.
///
/// `op_salt` separates operations sharing a seed (e.g. the numerator and
/// denominator runs of a ratio estimate).
#[derive(Clone, Copy, Debug)]
pub struct SampleDraws {
    base: u64,
}

impl SampleDraws {
    #[inline]
    pub fn new(seed: u64, op_salt: u64, sample: u64) -> Self {
        Self {
            base: splitmix64(sub_seed(seed, op_salt) ^ sample.wrapping_mul(GOLDEN)),
        }
    }

    #[inline]
    pub fn raw(&self, counter: u64) -> u64 {
        splitmix64(self.base.wrapping_add(counter))
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    #[inline]
    pub fn uniform(&self, counter: u64) -> f64 {
        (self.raw(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn direction(&self, counter: u64) -> crate::point::Direction {
        crate::point::Direction::from_bits(self.raw(counter) as u8)
    }
}

/// Uniform in the open interval (0, 1); never returns an endpoint, so
/// `-ln(u)` is a strictly positive exponential draw. 52-bit resolution:
/// at 53 bits the top value would round up to 1.0.
#[inline]
pub fn open01(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
