//! Deterministic RNG stream derivation.
//!
//! Every worker gets its own ChaCha8 stream keyed by `(master, tag, index)`,
//! so results never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Where a sample's randomness came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SeedTrace {
    pub master: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Stream identifier for `(tag, index)` under `master`.
pub fn stream_id(master: u64, tag: &str, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a(tag.as_bytes())) ^ splitmix64(index.wrapping_add(1)))
}

pub fn derive_rng(master: u64, tag: &str, index: u64) -> (ChaCha8Rng, SeedTrace) {
    let stream = stream_id(master, tag, index);
    (
        ChaCha8Rng::seed_from_u64(stream),
        SeedTrace { master, stream },
    )
}
