//! Deterministic RNG streams keyed by (seed, module, op, path index), so
//! results do not depend on scheduling or call order elsewhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn stream(seed: u64, module: &str, op: &str, path: u64) -> Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((module.len() as u64).to_le_bytes());
    h.update(module.as_bytes());
    h.update((op.len() as u64).to_le_bytes());
    h.update(op.as_bytes());
    h.update(path.to_le_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest[..32]);
    ChaCha8Rng::from_seed(key)
}

/// Draw a child seed from a parent stream (for nested operations).
pub fn child_seed<R: rand::Rng>(rng: &mut R) -> u64 {
    rng.gen()
}
