//! Seeded randomness shared by every sampling step.
//!
//! The generator is ChaCha8 from `rand_chacha` 0.9, seeded through
//! `SeedableRng::seed_from_u64`. Per-author streams are derived by hashing
//! `(seed, label)` with SHA-256 so that results do not depend on the order in
//! which authors are processed or on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for `label` under the global `seed`.
pub fn substream(seed: u64, label: &str) -> SeededRng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(digest.as_slice());
    ChaCha8Rng::from_seed(key)
}

/// Fisher–Yates shuffle, high index to low.
pub fn shuffle<T>(items: &mut [T], rng: &mut SeededRng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// Shuffles a copy of `items` and keeps the first `n`. Callers pass `items`
/// in a canonical order (sorted ids) so the result depends only on the seed.
pub fn sample<T: Clone>(items: &[T], n: usize, seed: u64) -> Vec<T> {
    let mut pool = items.to_vec();
    shuffle(&mut pool, &mut seeded(seed));
    pool.truncate(n);
    pool
}
