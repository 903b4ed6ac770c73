//! Counter-based stream derivation. Every (realization, slot) pair gets its
//! own generator seeded from a hash of the master seed and the pair, so a
//! run is reproducible bit for bit whatever the thread count.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

/// Stream of the link distance of a realization.
pub const DISTANCE: u64 = u64::MAX;
/// Stream of the interferer positions of a realization.
pub const GEOMETRY: u64 = u64::MAX - 1;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_key(seed: u64, realization: u64, stream: u64) -> u64 {
    let a = mix(seed ^ 0x9e37_79b9_7f4a_7c15);
    let b = mix(a ^ realization.wrapping_mul(0xd6e8_feb8_6659_fd93));
    mix(b ^ stream.wrapping_mul(0xa076_1d64_78bd_642f))
}

pub fn stream(seed: u64, realization: u64, stream: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(stream_key(seed, realization, stream))
}

/// Uniform on `[0, 1)` with 53 random bits.
pub fn unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
