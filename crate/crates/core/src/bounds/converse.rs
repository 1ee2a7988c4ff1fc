// SPDX-License-Identifier: Apache-2.0

//! Search over the feasible converse matrices: real PSD `A` with
//! `|A_xy| <= |<psi_x|psi_y>|`. Any feasible `A` certifies an upper bound
//! `-log2 min_P P^T A P`, so the search only has to stay feasible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{absolute_overlap_matrix, ChannelSpec};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, psd_projection, symmetrize, RMatrix};

/// PSD slack accepted for converse certificates.
pub const PSD_TOL: f64 = 1e-12;
const BOX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConverseFamily {
    /// The absolute overlap matrix itself.
    AbsoluteOverlaps,
    /// Entrywise sign flip of the absolute overlaps.
    SignPattern,
    /// A box-feasible matrix shrunk toward the identity until PSD.
    ShrunkToIdentity,
    /// Alternating box clamp and PSD projection.
    LocalSearch,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverseOptions {
    /// Alphabets up to this size get every off-diagonal sign pattern.
    pub sign_pattern_max_alphabet: usize,
    pub starts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for ConverseOptions {
    fn default() -> Self {
        Self {
            sign_pattern_max_alphabet: 4,
            starts: 8,
            iterations: 100,
            seed: 0,
        }
    }
}

pub struct ConverseCandidate {
    pub matrix: RMatrix,
    pub family: ConverseFamily,
}

/// Checks symmetry, positive semidefiniteness and the entrywise box.
pub fn check_converse_matrix(ch: &ChannelSpec, a: &RMatrix) -> Result<()> {
    let k = ch.alphabet_size();
    if a.nrows() != k || a.ncols() != k {
        return Err(Error::InfeasibleConverseMatrix(format!(
            "{}x{} matrix for alphabet {k}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InfeasibleConverseMatrix("non-finite entry".into()));
    }
    let aw = absolute_overlap_matrix(ch).into_matrix();
    for x in 0..k {
        for y in 0..k {
            if (a[(x, y)] - a[(y, x)]).abs() > BOX_TOL {
                return Err(Error::InfeasibleConverseMatrix(format!("asymmetric at ({x}, {y})")));
            }
            if a[(x, y)].abs() > aw[(x, y)] + BOX_TOL {
                return Err(Error::InfeasibleConverseMatrix(format!(
                    "|A[{x},{y}]| = {} exceeds overlap {}",
                    a[(x, y)].abs(),
                    aw[(x, y)]
                )));
            }
        }
    }
    let lmin = min_eigenvalue(a);
    if lmin < -PSD_TOL {
        return Err(Error::InfeasibleConverseMatrix(format!("lambda_min = {lmin:e}")));
    }
    Ok(())
}

/// Largest `t` in `[0, 1]` with `I + t (B - I)` PSD; `B` must have unit diagonal.
fn shrink_to_identity(b: &RMatrix) -> RMatrix {
    let k = b.nrows();
    let id = RMatrix::identity(k, k);
    let offset = b - &id;
    let mu = min_eigenvalue(&offset);
    let t = if mu >= -1.0 { 1.0 } else { (-1.0 / mu) * (1.0 - 1e-12) };
    let t = t.min(1.0);
    symmetrize(&(id + offset * t))
}

fn clamp_to_box(b: &RMatrix, aw: &RMatrix) -> RMatrix {
    let k = b.nrows();
    RMatrix::from_fn(k, k, |x, y| {
        if x == y {
            1.0
        } else {
            let cap = aw[(x, y)];
            (0.5 * (b[(x, y)] + b[(y, x)])).clamp(-cap, cap)
        }
    })
}

/// Feasible candidates in the searched family, in a fixed order.
pub fn candidates(ch: &ChannelSpec, opts: &ConverseOptions) -> (Vec<ConverseCandidate>, bool) {
    let aw = absolute_overlap_matrix(ch).into_matrix();
    let k = aw.nrows();
    let mut out = Vec::new();
    if min_eigenvalue(&aw) >= -PSD_TOL {
        // every feasible A is entrywise below A_W, so A_W is optimal
        out.push(ConverseCandidate {
            matrix: aw,
            family: ConverseFamily::AbsoluteOverlaps,
        });
        return (out, true);
    }
    out.push(ConverseCandidate {
        matrix: shrink_to_identity(&aw),
        family: ConverseFamily::ShrunkToIdentity,
    });

    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|x| ((x + 1)..k).map(move |y| (x, y))).collect();
    let exhaustive = k <= opts.sign_pattern_max_alphabet;
    if exhaustive {
        // pattern 0 is A_W itself, already handled
        for mask in 1u64..(1u64 << pairs.len()) {
            let mut b = aw.clone();
            for (bit, &(x, y)) in pairs.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    b[(x, y)] = -b[(x, y)];
                    b[(y, x)] = -b[(y, x)];
                }
            }
            let (matrix, family) = if min_eigenvalue(&b) >= -PSD_TOL {
                (b, ConverseFamily::SignPattern)
            } else {
                (shrink_to_identity(&b), ConverseFamily::ShrunkToIdentity)
            };
            out.push(ConverseCandidate { matrix, family });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.starts {
        let mut b = RMatrix::identity(k, k);
        for &(x, y) in &pairs {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let v = sign * rng.random_range(0.5..=1.0) * aw[(x, y)];
            b[(x, y)] = v;
            b[(y, x)] = v;
        }
        for _ in 0..opts.iterations {
            b = clamp_to_box(&psd_projection(&b), &aw);
        }
        out.push(ConverseCandidate {
            matrix: shrink_to_identity(&b),
            family: ConverseFamily::LocalSearch,
        });
    }
    out.push(ConverseCandidate {
        matrix: RMatrix::identity(k, k),
        family: ConverseFamily::Identity,
    });
    (out, exhaustive)
}
