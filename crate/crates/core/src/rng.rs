//! Seeded random streams.
//!
//! Every simulation draws from a [`Pcg32`] (64-bit LCG state, XSH-RR output).
//! A 64-bit seed is expanded with the SplitMix64 finalizer into the generator
//! state and stream selector; replica `r` of a run with master seed `s` uses
//! seed `replica_seed(s, r)`, so results depend only on `(s, r)` and never on
//! how replicas are scheduled across workers.

use rand::RngCore;
pub use rand_pcg::Pcg32;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replica `replica` under `master`.
pub fn replica_seed(master: u64, replica: u64) -> u64 {
    mix64(master ^ mix64(replica.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Generator for a single seed.
pub fn rng_from_seed(seed: u64) -> Pcg32 {
    let state = mix64(seed.wrapping_add(GOLDEN));
    let stream = mix64(seed ^ 0xD1B5_4A32_D192_ED03);
    Pcg32::new(state, stream)
}

/// Uniform variate on `(0, 1]` with 53 bits of resolution.
#[inline]
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Exponential variate with the given rate, by inversion on `(0, 1]`.
#[inline]
pub fn exponential<R: RngCore + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    -open_unit(rng).ln() / rate
}
