//! Seedable random streams with independently seedable substreams.
//!
//! The generator is ChaCha12, fixed per release for reproducibility. A root
//! seed selects the key; substream indices map onto the ChaCha stream
//! counter, so any number of workers or trials can draw from statistically
//! independent streams while staying deterministic for a fixed
//! (seed, substream layout).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Default root seed when neither a flag nor `EXPO_SURF_SEED` is given.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Substream `index` of the root stream identified by `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives a child root seed, used to give each experiment trial its own
/// independent family of substreams. SplitMix64 finalizer.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
