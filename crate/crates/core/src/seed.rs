//! Deterministic seed derivation.
//!
//! Every random stream in the pipeline is a ChaCha8 generator seeded from a
//! base seed mixed with a list of integer tags, so that independent jobs
//! (one path, one sweep cell, one training step) never share state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags, kept distinct so role streams never collide.
pub mod tag {
    pub const BASE_TRAIN: u64 = 0x7261_696e;
    pub const BASE_TEST: u64 = 0x7465_7374;
    pub const TRANSFER_TEST: u64 = 0x7866_7274;
    pub const VALIDATION: u64 = 0x7661_6c69;
    pub const SHOTS: u64 = 0x7368_6f74;
    pub const SHUFFLE: u64 = 0x7368_7566;
    pub const PATH: u64 = 0x7061_7468;
    pub const INIT: u64 = 0x696e_6974;
    pub const EPOCH: u64 = 0x6570_6f63;
    pub const DROPOUT: u64 = 0x6472_6f70;
    pub const TIE: u64 = 0x7469_6573;
    pub const MAP: u64 = 0x6d61_7073;
    pub const SCENARIO: u64 = 0x7363_656e;
    pub const CELL: u64 = 0x6365_6c6c;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `tags` into `base`, order-sensitively.
pub fn derive(base: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(base), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn rng(base: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base, tags))
}
