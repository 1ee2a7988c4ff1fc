// SPDX-License-Identifier: Apache-2.0

//! Deterministic fixtures shared by the benchmarks.

use cqzl_core::channel::random_channel;
use cqzl_core::linalg::CMatrix;
use cqzl_core::{expurgate_code, trine_channel, ChannelSpec, Codebook, GramMatrix, SimplexDistribution};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_channels(count: usize, alphabet: usize, dim: usize, seed: u64) -> Vec<ChannelSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_channel(alphabet, dim, &mut rng)).collect()
}

/// Unit-diagonal Hermitian matrix with every row strictly dominant.
pub fn dominant_gram(m: usize, seed: u64) -> GramMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = CMatrix::identity(m, m);
    let scale = 0.99 / (m.max(2) - 1) as f64;
    for i in 0..m {
        for j in (i + 1)..m {
            let z = Complex64::from_polar(scale * rng.random_range(0.0..1.0), rng.random_range(-3.2..3.2));
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
        }
    }
    GramMatrix::new(g).expect("Hermitian by construction")
}

/// Expurgated trine code of block length `n` under the uniform input.
pub fn trine_code(n: usize, seed: u64) -> Codebook {
    expurgate_code(&trine_channel(), &SimplexDistribution::uniform(3), n, seed)
        .expect("trine codes exist for n >= 6")
        .0
}
