//! Deterministic random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by a 64-bit
//! seed plus a stream id, so independent draws (positions, fields, coupling
//! signs, pulse jitter) never share state and are reproducible bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Stream ids for the independent draws of one disorder realization.
pub mod stream {
    pub const POSITIONS: u64 = 0;
    pub const ONSITE: u64 = 1;
    pub const SIGNS: u64 = 2;
    pub const JITTER: u64 = 3;
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derive a task seed from the master seed and the task's own coordinates.
///
/// Hashing coordinates rather than list positions means adding grid points
/// leaves every existing task's seed unchanged.
pub fn derive_seed(master: u64, tag: &str, coords: &[f64], replica: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag.as_bytes());
    for c in coords {
        h.update(c.to_bits().to_le_bytes());
    }
    h.update(replica.to_le_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_independent_and_reproducible() {
        let a: Vec<u64> = stream_rng(7, 0).random_iter().take(4).collect();
        let b: Vec<u64> = stream_rng(7, 0).random_iter().take(4).collect();
        let c: Vec<u64> = stream_rng(7, 1).random_iter().take(4).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn derived_seed_depends_only_on_coordinates() {
        let s1 = derive_seed(1, "z2", &[3.2, 0.79], 0);
        assert_eq!(s1, derive_seed(1, "z2", &[3.2, 0.79], 0));
        assert_ne!(s1, derive_seed(1, "z2", &[3.2, 0.79], 1));
        assert_ne!(s1, derive_seed(2, "z2", &[3.2, 0.79], 0));
        assert_ne!(s1, derive_seed(1, "z2", &[3.2, 0.80], 0));
    }
}
