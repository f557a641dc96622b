//! Seeded random streams.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), whose
//! output is specified bit-for-bit and identical across platforms. A 64-bit
//! seed is expanded with `SeedableRng::seed_from_u64`; independent purposes
//! that share a seed draw from distinct ChaCha stream ids, so generating a
//! graph, choosing edge signs, and sampling with the same seed never reuse
//! keystream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id for graph generation.
pub const GRAPH_STREAM: u64 = 0;
/// Stream id for random edge signs during model synthesis.
pub const SIGN_STREAM: u64 = 1;
/// Stream id for Gaussian sample draws.
pub const SAMPLE_STREAM: u64 = 2;

pub type StreamRng = ChaCha8Rng;

/// ChaCha8 generator for `seed`, positioned at stream `stream`.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-trial seed: `master ⊕ index`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    master ^ index
}
