//! Counter-based seed derivation.
//!
//! A sub-seed is a pure function of the root seed and a path of indices, so
//! trials can be generated in any order (or concurrently) and still see the
//! same random stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives a seed from `root` and an index path, e.g. `sub_seed(root, &[cell, trial])`.
pub fn sub_seed(root: u64, path: &[u64]) -> u64 {
    let mut h = splitmix64(root);
    for (depth, &i) in path.iter().enumerate() {
        h = splitmix64(h ^ splitmix64(i.wrapping_add((depth as u64 + 1) << 56)));
    }
    h
}

/// The generator used throughout the crate.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
