//! Named random streams split from one master seed.
//!
//! Each stream gets its own ChaCha8 generator so that perturbing one source
//! of randomness (say, the adversary) leaves the others bit-identical.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stream {
    Costs,
    Attack,
    Init,
    Trajectory,
}

impl Stream {
    pub const ALL: [Stream; 4] = [Stream::Costs, Stream::Attack, Stream::Init, Stream::Trajectory];

    pub fn name(self) -> &'static str {
        match self {
            Stream::Costs => "costs",
            Stream::Attack => "attack",
            Stream::Init => "init",
            Stream::Trajectory => "trajectory",
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for `stream` derived from `master`. Stable across releases.
pub fn derive_seed(master: u64, stream: Stream) -> u64 {
    let tag = stream.name().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3)
    });
    splitmix64(master ^ splitmix64(tag))
}

pub fn stream_rng(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
