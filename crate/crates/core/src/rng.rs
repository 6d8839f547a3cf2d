//! Seeding.
//!
//! Every random stream is a `ChaCha8Rng` seeded through `seed_from_u64`.
//! Child seeds are derived with SplitMix64 so any language can reproduce
//! them:
//!
//! ```text
//! splitmix64(x):
//!     z = x + 0x9E3779B97F4A7C15
//!     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!     return z ^ (z >> 31)                      (all arithmetic mod 2^64)
//!
//! derive(base, [i0, i1, ...]):
//!     h = splitmix64(base)
//!     for i in indices: h = splitmix64(h ^ splitmix64(i))
//!     return h
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub const fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, indices: &[u64]) -> u64 {
    indices
        .iter()
        .fold(splitmix64(base), |h, &i| splitmix64(h ^ splitmix64(i)))
}

pub fn rng_from(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Stream tags so independent consumers of one seed never share a stream.
pub mod stream {
    pub const PLACEMENT: u64 = 1;
    pub const PLANNER: u64 = 2;
    pub const PEER: u64 = 3;
    pub const MAP: u64 = 4;
    pub const TRIAL: u64 = 5;
    pub const BOUSTRO: u64 = 6;
}
