// SPDX-License-Identifier: Apache-2.0

//! Seed derivation and split streams.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha::ChaCha8Rng`)
//! keyed by a 64-bit seed through `SeedableRng::seed_from_u64`. Independent
//! sub-streams are selected with `set_stream`, so a codeword's symbols depend
//! only on the attempt seed and the codeword index, not on sampling order.
//! Retry seeds are derived with the SplitMix64 finalizer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function applied to `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed used for the given (zero-based) attempt of a seeded procedure.
pub fn attempt_seed(seed: u64, attempt: u32) -> u64 {
    splitmix64(seed ^ u64::from(attempt))
}

/// Independent stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
