//! Deterministic randomness keyed by (root seed, stream id).
//!
//! Every target node gets its own ChaCha stream derived from the root seed and the
//! node id, so results do not depend on which worker evaluates which node.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::NodeId;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(root: u64, stream: u64) -> u64 {
    mix(mix(root ^ 0x9e37_79b9_7f4a_7c15).wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

pub fn stream_rng(root: u64, stream: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, stream))
}

pub fn node_rng(root: u64, node: NodeId) -> StreamRng {
    stream_rng(root, node.0 as u64)
}
