//! Seeded random streams. Every replicate or bootstrap draw gets its own
//! stream derived from `(seed, index)`, so serial and parallel runs agree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for stream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A 64-bit seed for replicate `index`, distinct for every `(seed, index)`
/// pair in practice (SplitMix64 finalizer over the pair).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
