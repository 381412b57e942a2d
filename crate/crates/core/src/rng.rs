//! Seed derivation for reproducible parallel sampling.
//!
//! Every independent task gets its own ChaCha8 stream keyed by the master
//! seed, so a task's random numbers never depend on which thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x6a61_6568_616b_2017;

pub fn task_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Packs two task coordinates into one stream id.
pub fn stream_id(major: u64, minor: u64) -> u64 {
    (major << 32) ^ (minor & 0xffff_ffff)
}

/// SplitMix64 finalizer; used to derive sub-seeds from a master seed.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
