//! Seed derivation for reproducible, schedule-independent random streams.
//!
//! Every stochastic routine takes a `u64` seed. Work that fans out (ensemble
//! replicates, posterior replicates, polygon samples) derives one ChaCha
//! stream per item from `(seed, purpose, index)`, so results never depend on
//! how rayon schedules the items.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type StreamRng = ChaCha12Rng;

/// Domain-separation tags for [`stream`].
pub mod purpose {
    pub const SIMULATE: u64 = 1;
    pub const ENSEMBLE: u64 = 2;
    pub const POLYGON: u64 = 3;
    pub const POSTERIOR: u64 = 4;
    pub const OBSERVE: u64 = 5;
    pub const HOLDOUT: u64 = 6;
    pub const SCENARIO: u64 = 7;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a purpose tag into a user seed.
pub fn derive_seed(seed: u64, purpose: u64) -> u64 {
    splitmix64(seed ^ splitmix64(purpose))
}

/// Independent generator for item `index` of the given purpose.
pub fn stream(seed: u64, purpose: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, purpose));
    rng.set_stream(index);
    rng
}
