//! Stable seed derivation.
//!
//! Every random stream in a run is keyed by the root seed plus the position
//! of the task that consumes it, so results never depend on execution order.
//! The derived seed is the first eight bytes (little endian) of
//! `SHA-256(tag || 0x00 || root_le || fold_le || inner_le || user_id)`, where
//! `fold` and `inner` are encoded as `u64` and a missing inner fold is
//! `u64::MAX`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn derive_seed(root: u64, tag: &str, fold: usize, inner: Option<usize>, user_id: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(tag.as_bytes());
    hasher.update([0u8]);
    hasher.update(root.to_le_bytes());
    hasher.update((fold as u64).to_le_bytes());
    hasher.update(inner.map_or(u64::MAX, |j| j as u64).to_le_bytes());
    hasher.update(user_id.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lowercase hex encoding.
pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
