//! Seed derivation for schedule-independent reproducibility.
//!
//! Every Monte Carlo task (one SNR point of one CQI, one fading draw of one
//! resource block, one transport-block success draw) owns a generator derived
//! from the run seed and the task's coordinates. Results are then identical
//! no matter how work is distributed across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; good avalanche for combining seed material.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a base seed and a list of coordinate tags.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut acc = splitmix64(base);
    for &t in tags {
        acc = splitmix64(acc ^ splitmix64(t));
    }
    acc
}

/// Builds a generator for the task identified by `tags` under `base`.
pub fn task_rng(base: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tags))
}

/// One uniform draw in [0, 1) addressed purely by coordinates.
///
/// Used where a full generator per draw would be wasteful (per-RB fading,
/// per-TB success draws).
pub fn indexed_uniform(base: u64, tags: &[u64]) -> f64 {
    let bits = derive_seed(base, tags) >> 11;
    bits as f64 / (1u64 << 53) as f64
}

/// Standard-normal draw addressed purely by coordinates (Box-Muller on two
/// decorrelated indexed uniforms).
pub fn indexed_normal(base: u64, tags: &[u64]) -> f64 {
    let u1 = indexed_uniform(base, tags).max(f64::MIN_POSITIVE);
    let u2 = indexed_uniform(splitmix64(base ^ 0xa5a5_a5a5_a5a5_a5a5), tags);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
