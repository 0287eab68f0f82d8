//! Seeded random streams.
//!
//! Every run owns one [`SimRng`]. Batch replicates get their seed from
//! [`derive_seed`], a SplitMix64 chain over `(master, grid point, replicate)`,
//! so any single cell of a sweep can be re-run in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `replicate` at grid point `grid` of a sweep.
pub fn derive_seed(master: u64, grid: u64, replicate: u64) -> u64 {
    let h = splitmix64(master);
    let h = splitmix64(h ^ grid);
    splitmix64(h ^ replicate.wrapping_mul(GOLDEN_GAMMA))
}
