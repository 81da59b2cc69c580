//! Seeded randomness.
//!
//! Every stochastic component takes its own [`ChaCha8Rng`] derived from one
//! root seed, so runs are reproducible end to end while component streams
//! stay independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Labels for the independent random streams derived from the root seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Data,
    Env,
    Agent,
    Noise,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Data => 0xD47A,
            Stream::Env => 0xE20F,
            Stream::Agent => 0xA9E7,
            Stream::Noise => 0x201E,
        }
    }
}

/// Derive a per-stream seed from the root seed (splitmix64 finalizer).
pub fn derive_seed(root: u64, stream: Stream) -> u64 {
    let mut z = root ^ stream.tag().wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Build the RNG for a given stream of a seeded run.
pub fn stream_rng(root: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, stream))
}

/// Serializable snapshot of a ChaCha stream: seed plus word position.
/// Restoring yields the exact same continuation of the stream.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RngCheckpoint {
    pub seed: u64,
    pub word_pos_hi: u64,
    pub word_pos_lo: u64,
}

impl RngCheckpoint {
    pub fn capture(seed: u64, rng: &ChaCha8Rng) -> Self {
        let pos = rng.get_word_pos();
        Self {
            seed,
            word_pos_hi: (pos >> 64) as u64,
            word_pos_lo: pos as u64,
        }
    }

    pub fn restore(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let pos = ((self.word_pos_hi as u128) << 64) | self.word_pos_lo as u128;
        rng.set_word_pos(pos);
        rng
    }
}
