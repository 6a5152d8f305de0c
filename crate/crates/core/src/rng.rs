//! Counter-based stream derivation.
//!
//! Every random draw in a simulation is keyed by `(master seed, tag, cell, replicate)`.
//! The key picks a ChaCha stream, so replicate `r` of cell `c` sees the same numbers
//! regardless of how many other cells or replicates exist, or which thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random generator used throughout the crate.
pub type SeededRng = ChaCha8Rng;

/// Stable tags separating the independent uses of a replicate stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamTag {
    Model = 1,
    Train = 2,
    Test = 3,
    Split = 4,
    Hellinger = 5,
    Simulate = 6,
    Misc = 7,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a ChaCha stream for `(master, tag, cell, replicate)`.
pub fn stream(master: u64, tag: StreamTag, cell: u64, replicate: u64) -> SeededRng {
    let mut key = [0u8; 32];
    let mut s = master;
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    let id = splitmix64(splitmix64(splitmix64(tag as u64) ^ cell) ^ replicate.rotate_left(32));
    rng.set_stream(id);
    rng
}

/// Convenience: a generator from a plain seed (stream 0).
pub fn from_seed(seed: u64) -> SeededRng {
    stream(seed, StreamTag::Misc, 0, 0)
}
