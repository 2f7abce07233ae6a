//! Deterministic random streams.
//!
//! Every replication `i` of an experiment with base seed `s` draws from the
//! ChaCha8 generator keyed by `s` on stream `i`. Streams are disjoint
//! counter ranges of the same key, so results do not depend on which thread
//! runs which replication.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(base_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(stream);
    rng
}
