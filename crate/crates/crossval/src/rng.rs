//! Deterministic stream derivation.
//!
//! Every random quantity in the crate is drawn from a ChaCha12 stream keyed
//! by `(seed, tag, index)`. ChaCha12 is a counter-based generator with a
//! published specification, so identical inputs reproduce identical draws on
//! every platform. The 32-byte key is the little-endian packing
//! `seed || fnv1a64(tag) || index || 0x63726f737376616c`, which gives
//! distinct streams for distinct purposes without shared state: datasets,
//! plans, and replicates can be produced in parallel and still match a
//! sequential run bit for bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// FNV-1a 64-bit hash; fixed constants from the FNV reference.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x1_0000_01b3);
    }
    h
}

const STREAM_PAD: u64 = 0x6372_6f73_7376_616c;

/// Derive the ChaCha12 stream for `(seed, tag, index)`.
pub fn derive_rng(seed: u64, tag: &str, index: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&fnv1a64(tag.as_bytes()).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    key[24..32].copy_from_slice(&STREAM_PAD.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// Derive a child seed; used when an operation takes a plain `u64` seed.
pub fn derive_seed(seed: u64, tag: &str, index: u64) -> u64 {
    use rand::Rng;
    derive_rng(seed, tag, index).random::<u64>()
}
