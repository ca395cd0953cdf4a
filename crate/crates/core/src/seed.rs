//! Seed derivation for independent deterministic RNG streams.

use sha2::{Digest, Sha256};

/// Derives a child seed from a master seed and a stream label.
///
/// The little-endian master seed is hashed together with the label, so
/// streams for different labels are independent and every run stays a pure
/// function of the single master seed.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}
