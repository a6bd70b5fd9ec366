//! Deterministic seed derivation and heavy-tailed draws.
//!
//! Every randomized routine in the crate takes an explicit `u64` seed and
//! derives independent streams from it with SplitMix64, so results are
//! reproducible bit for bit regardless of how work is chunked or threaded.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::fmath;

/// One SplitMix64 output step.
fn split_mix(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for an independent stream (`chunk`, bootstrap target,
/// matrix draw, ...) from a base seed.
pub(crate) fn derive_seed(base: u64, stream: u64) -> u64 {
    split_mix(base ^ stream.wrapping_mul(0xA24B_AED4_963E_E407))
}

/// A fresh generator for the given seed.
pub(crate) fn rng_from(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// One standard Pareto draw: survival `P(R > t) = t^(-alpha)` for `t >= 1`,
/// generated by inversion. `inv_alpha` is `1/alpha`.
#[inline]
pub(crate) fn standard_pareto<R: Rng + ?Sized>(rng: &mut R, inv_alpha: f64) -> f64 {
    // OpenClosed01 keeps u away from 0, so the draw is always finite, and
    // includes u = 1, so the support starts exactly at 1.
    let u: f64 = rng.sample(rand::distributions::OpenClosed01);
    fmath::powf(u, -inv_alpha)
}
