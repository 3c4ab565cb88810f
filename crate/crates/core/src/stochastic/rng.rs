//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator whose 32-byte seed is expanded with
//! splitmix64 from a 64-bit key. The mixing functions here are part of the
//! stable interface: changing them changes every published result.
//!
//! ```text
//! splitmix64(x): z = x + 0x9E3779B97F4A7C15
//!                z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!                z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!                return z ^ (z >> 31)
//! mix(a, b)    = splitmix64(splitmix64(a) ^ b)
//! episode seed = mix(master_seed, episode_index)
//! stream seed  = mix(episode_seed, stream_key)
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix(a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(a) ^ b)
}

pub fn episode_seed(master_seed: u64, episode_index: u64) -> u64 {
    mix(master_seed, episode_index)
}

/// Identifies an independent sub-stream inside an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamKey {
    /// Initial-parameter draws for scenario role `i`.
    Role(usize),
    /// Per-frame draws of sensor `i` (0 = onboard, 1 = roadside).
    Sensor(usize),
}

impl StreamKey {
    pub fn code(self) -> u64 {
        match self {
            StreamKey::Role(i) => i as u64,
            StreamKey::Sensor(i) => (1u64 << 32) | i as u64,
        }
    }
}

/// Builds a stream from a 64-bit seed.
pub fn stream_from_seed(seed: u64) -> Stream {
    let mut bytes = [0u8; 32];
    let mut state = seed;
    for chunk in bytes.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    Stream::from_seed(bytes)
}

/// The sub-stream `key` of the episode with seed `episode_seed`.
pub fn substream(episode_seed: u64, key: StreamKey) -> Stream {
    stream_from_seed(mix(episode_seed, key.code()))
}
