//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 generator keyed by a 64-bit seed, with the
//! generator's native 64-bit stream id selecting one of 2^64 independent
//! keystreams. Workers never share a generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for shard `shard` of a job whose own stream index is `base`.
pub fn shard_stream(base: u64, shard: u64) -> u64 {
    (base << 32) ^ shard
}
