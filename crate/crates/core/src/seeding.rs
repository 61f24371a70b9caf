//! Deterministic seed derivation for independent RNG streams.
//!
//! Every stochastic component (shadowing per UE/cell pair, waypoint draws,
//! weight init, batch shuffling, dropout masks, sweep points) derives its own
//! seed from a base seed plus fixed stream identifiers, so results never
//! depend on iteration order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mix a base seed with two stream identifiers (splitmix64 finalizer).
pub fn derive_seed(base: u64, stream: u64, substream: u64) -> u64 {
    let mut z = base
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ substream.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded RNG for a derived stream.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
