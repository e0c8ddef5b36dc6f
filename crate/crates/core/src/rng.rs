//! Counter-based random streams.
//!
//! Every Monte Carlo path owns a ChaCha8 stream selected by
//! `(master seed, domain, path index)`. ChaCha is a counter-mode generator, so
//! the stream for a path does not depend on how paths are scheduled across
//! worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type PathRng = ChaCha8Rng;

/// Domain tags keep independent stages of a pipeline on disjoint streams.
pub mod domain {
    pub const JUMPS: u64 = 1;
    pub const PATHS: u64 = 2;
    pub const INVARIANT: u64 = 3;
    pub const MIXING: u64 = 4;
    pub const LIMIT: u64 = 5;
    pub const RESOLVENT: u64 = 6;
    pub const FCLT: u64 = 7;
    pub const PUSHFORWARD: u64 = 8;
    pub const JUMP_MEASURE: u64 = 9;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Master seed from which per-path streams are derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSequence {
    pub master: u64,
}

impl SeedSequence {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    /// Sub-sequence for an independent stage (e.g. one epsilon of a sweep).
    pub fn derive(&self, tag: u64) -> SeedSequence {
        SeedSequence {
            master: splitmix64(self.master ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }

    /// Stream for path `index` within `domain`.
    pub fn stream(&self, domain: u64, index: u64) -> PathRng {
        let key = splitmix64(self.master ^ splitmix64(domain));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(index);
        rng
    }
}
