// SPDX-License-Identifier: Apache-2.0

//! Random-coding construction of zero-error list-2 codes by expurgation.
//!
//! `2M` codewords are drawn i.i.d. from `P^n` with `M = floor(Q_P^{-n} / 4)`.
//! Each codeword gets its interference sum `S_i = sum_{j != i} |<psi_i|psi_j>|`;
//! the `M` codewords with the smallest sums are kept when all of them satisfy
//! `S_i <= 1`. A kept code has a diagonally dominant Gram matrix, which
//! [`build_list2_decoder`] factors into a list-2 decoder.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{absolute_overlap_matrix, codeword_overlap_polar, ChannelSpec};
use crate::error::{Error, Result};
use crate::factor::{factor_diag_dominant, GramMatrix, SparseFactor};
use crate::linalg::CMatrix;
use crate::rng::{attempt_seed, stream};
use crate::simplex::{quadratic_form, SimplexDistribution};

pub const MAX_ATTEMPTS: u32 = 64;
/// Largest target code size the construction accepts (`2M` codewords are sampled).
pub const MAX_CODE_SIZE: u64 = 1 << 13;
/// `Q_P` at or above `1 - TRIVIAL_TOL` is treated as a trivial channel.
pub const TRIVIAL_TOL: f64 = 1e-12;

const UNDERFLOW_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codebook {
    pub n: usize,
    pub codewords: Vec<Vec<usize>>,
    /// Hash of the channel the code was built for.
    pub channel_hash: String,
}

impl Codebook {
    pub fn size(&self) -> usize {
        self.codewords.len()
    }

    /// Checks lengths, symbol range and the channel hash.
    pub fn check_channel(&self, ch: &ChannelSpec) -> Result<()> {
        let found = crate::io::channel_hash(ch);
        if found != self.channel_hash {
            return Err(Error::HashMismatch {
                expected: self.channel_hash.clone(),
                found,
            });
        }
        let alphabet = ch.alphabet_size();
        for w in &self.codewords {
            if w.len() != self.n {
                return Err(Error::LengthMismatch(w.len(), self.n));
            }
            if let Some(&symbol) = w.iter().find(|&&s| s >= alphabet) {
                return Err(Error::SymbolOutOfRange { symbol, alphabet });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpurgationCertificate {
    /// Interference sums of the kept codewords, recomputed on the final code.
    pub s_values: Vec<f64>,
    pub target_m: u64,
    /// Number of sampling rounds used, counting the successful one.
    pub attempts: u32,
    pub seed: u64,
}

/// `floor(Q^{-n} / 4)`, or `None` when it does not fit in 63 bits.
pub fn target_code_size(q: f64, n: usize) -> Option<u64> {
    let log2_size = -(n as f64) * q.log2() - 2.0;
    if log2_size >= 63.0 {
        return None;
    }
    // relative slack so that exact powers are not floored one below
    Some((log2_size.exp2() * (1.0 + 1e-12)).floor() as u64)
}

/// Smallest block length whose target code size reaches `min_size`.
pub fn min_block_length(q: f64, min_size: u64) -> Option<usize> {
    if !(q < 1.0 - TRIVIAL_TOL) {
        return None;
    }
    (1..).find_map(|n| match target_code_size(q, n) {
        None => Some(None),
        Some(m) if m >= min_size => Some(Some(n)),
        Some(_) => None,
    })?
}

/// Samples `count` codewords of length `n` from `P^n`; codeword `i` is drawn
/// from stream `i` of `seed`.
pub fn sample_codewords(p: &SimplexDistribution, n: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let dist = WeightedIndex::new(p.probs()).expect("a distribution has positive mass");
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            (0..n).map(|_| dist.sample(&mut rng)).collect()
        })
        .collect()
}

/// Natural logs of the symbol overlaps, `-inf` below the underflow floor.
fn log_overlap_table(ch: &ChannelSpec) -> Vec<Vec<f64>> {
    let a = absolute_overlap_matrix(ch).into_matrix();
    let k = a.nrows();
    (0..k)
        .map(|x| {
            (0..k)
                .map(|y| match a[(x, y)] {
                    _ if x == y => 0.0,
                    v if v < UNDERFLOW_FLOOR => f64::NEG_INFINITY,
                    v => v.min(1.0).ln(),
                })
                .collect()
        })
        .collect()
}

fn abs_overlap(table: &[Vec<f64>], xs: &[usize], ys: &[usize]) -> f64 {
    xs.iter().zip(ys).map(|(&x, &y)| table[x][y]).sum::<f64>().exp()
}

/// `S_i` for every codeword in `words`.
pub fn interference_sums(ch: &ChannelSpec, words: &[Vec<usize>]) -> Vec<f64> {
    let table = log_overlap_table(ch);
    (0..words.len())
        .into_par_iter()
        .map(|i| {
            (0..words.len())
                .filter(|&j| j != i)
                .map(|j| abs_overlap(&table, &words[i], &words[j]))
                .sum()
        })
        .collect()
}

pub fn expurgate_code(
    ch: &ChannelSpec,
    p: &SimplexDistribution,
    n: usize,
    seed: u64,
) -> Result<(Codebook, ExpurgationCertificate)> {
    if p.len() != ch.alphabet_size() {
        return Err(Error::Shape(format!(
            "distribution of length {} for alphabet {}",
            p.len(),
            ch.alphabet_size()
        )));
    }
    if n == 0 {
        return Err(Error::Shape("block length must be positive".into()));
    }
    let q = quadratic_form(absolute_overlap_matrix(ch).matrix(), p)?;
    if q >= 1.0 - TRIVIAL_TOL {
        return Err(Error::TrivialChannel);
    }
    let m = target_code_size(q, n).ok_or(Error::CodeTooLarge(u64::MAX))?;
    if m < 1 {
        return Err(Error::BlockLengthTooSmall {
            n,
            size: m,
            min_n: min_block_length(q, 2).unwrap_or(usize::MAX),
        });
    }
    if m > MAX_CODE_SIZE {
        return Err(Error::CodeTooLarge(m));
    }
    let m = m as usize;
    let channel_hash = crate::io::channel_hash(ch);

    for attempt in 0..MAX_ATTEMPTS {
        let words = sample_codewords(p, n, 2 * m, attempt_seed(seed, attempt));
        let s = interference_sums(ch, &words);
        let mut good: Vec<usize> = (0..words.len()).filter(|&i| s[i] <= 1.0).collect();
        if good.len() < m {
            continue;
        }
        good.sort_by(|&a, &b| s[a].total_cmp(&s[b]).then(a.cmp(&b)));
        good.truncate(m);
        good.sort_unstable();
        let codewords: Vec<Vec<usize>> = good.into_iter().map(|i| words[i].clone()).collect();
        let s_values = interference_sums(ch, &codewords);
        return Ok((
            Codebook {
                n,
                codewords,
                channel_hash,
            },
            ExpurgationCertificate {
                s_values,
                target_m: m as u64,
                attempts: attempt + 1,
                seed,
            },
        ));
    }
    Err(Error::AttemptsExhausted(MAX_ATTEMPTS))
}

/// Gram matrix of the codeword states, phases included.
pub fn code_gram(ch: &ChannelSpec, code: &Codebook) -> Result<GramMatrix> {
    let m = code.size();
    let mut g = CMatrix::identity(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let (log_mod, phase) = codeword_overlap_polar(ch, &code.codewords[i], &code.codewords[j])?;
            let z = Complex64::from_polar(log_mod.exp(), phase);
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
        }
    }
    GramMatrix::new(g)
}

/// Factor of a diagonally dominant Gram matrix; outcome `k` decodes to the
/// columns of row `k`.
pub fn build_list2_decoder(g: &GramMatrix) -> Result<SparseFactor> {
    factor_diag_dominant(g)
}

/// `log2(M / L) / n`.
pub fn empirical_rate(code: &Codebook, list_size: usize) -> f64 {
    (code.size() as f64 / list_size as f64).log2() / code.n as f64
}
