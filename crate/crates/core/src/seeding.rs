//! Deterministic seed-stream derivation so that chains, sensitivity cells
//! and simulations draw from disjoint, reproducible RNG streams.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub(crate) const STREAM_INIT: u64 = 0x1;
pub(crate) const STREAM_CHAIN: u64 = 0x1000;
pub(crate) const STREAM_SENS: u64 = 0x2000;
pub(crate) const STREAM_SIM: u64 = 0x3000;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for an independent stream identified by `stream` within `base`.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    splitmix64(base ^ splitmix64(stream))
}

pub(crate) fn rng_for(base: u64, stream: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(base, stream))
}
