//! Replayable random streams keyed by `(master_seed, replication_index, role)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator behind every stream. ChaCha output is specified, so a
/// given seed replays identically on every platform.
pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamRole {
    /// The replication's main particle trajectory.
    Trajectory,
    /// The independent copy used for the denominator of the independent-ratio estimator.
    IndependentCopy,
}

impl StreamRole {
    fn tag(self) -> u64 {
        match self {
            StreamRole::Trajectory => 0x7472_616a_6563_7401,
            StreamRole::IndependentCopy => 0x696e_6465_7063_7902,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub replication_index: u64,
    pub role: StreamRole,
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(master_seed: u64, replication_index: u64, role: StreamRole) -> Self {
        Self {
            master_seed,
            replication_index,
            role,
        }
    }

    pub fn trajectory(master_seed: u64, replication_index: u64) -> Self {
        Self::new(master_seed, replication_index, StreamRole::Trajectory)
    }

    /// Child seed: each component is folded in through a full avalanche round.
    pub fn child_seed(&self) -> u64 {
        let a = mix64(self.master_seed.wrapping_add(GOLDEN_GAMMA));
        let b = mix64(a ^ self.replication_index.wrapping_mul(GOLDEN_GAMMA));
        mix64(b ^ self.role.tag())
    }

    pub fn rng(&self) -> StreamRng {
        StreamRng::seed_from_u64(self.child_seed())
    }
}
