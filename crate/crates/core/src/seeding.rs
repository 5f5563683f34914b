//! Keyed RNG derivation.
//!
//! Every stochastic draw in the pipeline is keyed by `(seed, tag, key)` so
//! generation is order-independent: the stream an image or class sees does
//! not depend on how work was batched or parallelized.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a deterministic RNG from a global seed, a domain tag, and an
/// item key (typically an image_id or class_id).
pub fn keyed_rng(seed: u64, tag: &str, key: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(tag.as_bytes());
    hasher.update([0u8]);
    hasher.update(key.as_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Hex digest of arbitrary bytes, used for provenance hashes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
