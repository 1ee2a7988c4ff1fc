// SPDX-License-Identifier: Apache-2.0

//! Sparse factorizations `G = V^dagger V` of diagonally dominant Hermitian
//! matrices with at most two nonzeros per row of `V`.
//!
//! Each off-diagonal pair `(i, j)` with `g_ij = r e^{i theta}` contributes a row
//! `sqrt(r) e^{-i theta/2}` at column `i` and `sqrt(r) e^{+i theta/2}` at column
//! `j`, whose outer product reproduces `g_ij` and adds `r` to both diagonal
//! entries. Dominance leaves a nonnegative diagonal remainder that is covered
//! by one singleton row per column.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_hermitian, min_eigenvalue, CMatrix, RMatrix};

/// Off-diagonal moduli at or below this produce no pair row.
pub const PAIR_CUTOFF: f64 = 1e-14;
/// Slack for dominance checks and radicand clipping.
pub const RADICAND_TOL: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-12;

/// Hermitian matrix of pairwise inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(CMatrix);

impl GramMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !is_hermitian(&m, HERMITIAN_TOL) {
            return Err(Error::NotHermitian);
        }
        let mut m = crate::linalg::hermitize(&m);
        for i in 0..m.nrows() {
            m[(i, i)].im = 0.0;
        }
        Ok(Self(m))
    }

    pub fn from_real(m: &RMatrix) -> Result<Self> {
        Self::new(crate::linalg::complexify(m))
    }

    pub fn identity(m: usize) -> Self {
        Self(CMatrix::identity(m, m))
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn off_diagonal_abs_sum(&self, i: usize) -> f64 {
        (0..self.size()).filter(|&j| j != i).map(|j| self.0[(i, j)].norm()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseRow {
    pub entries: Vec<(usize, Complex64)>,
}

impl SparseRow {
    pub fn columns(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.entries.iter().map(|(j, _)| *j).collect();
        c.sort_unstable();
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseFactor {
    pub ncols: usize,
    pub rows: Vec<SparseRow>,
}

impl SparseFactor {
    pub fn to_dense(&self) -> CMatrix {
        let mut v = CMatrix::zeros(self.rows.len(), self.ncols);
        for (k, row) in self.rows.iter().enumerate() {
            for &(j, z) in &row.entries {
                v[(k, j)] += z;
            }
        }
        v
    }

    /// `V^dagger V`.
    pub fn gram(&self) -> CMatrix {
        let mut g = CMatrix::zeros(self.ncols, self.ncols);
        for row in &self.rows {
            for &(i, a) in &row.entries {
                for &(j, b) in &row.entries {
                    g[(i, j)] += a.conj() * b;
                }
            }
        }
        g
    }
}

pub fn is_diagonally_dominant(g: &GramMatrix, tol: f64) -> bool {
    first_non_dominant_row(g, tol).is_none()
}

fn first_non_dominant_row(g: &GramMatrix, tol: f64) -> Option<usize> {
    (0..g.size()).find(|&i| {
        let d = g.get(i, i).re;
        !(d > 0.0) || d + tol < g.off_diagonal_abs_sum(i)
    })
}

pub fn factor_diag_dominant(g: &GramMatrix) -> Result<SparseFactor> {
    if let Some(row) = first_non_dominant_row(g, RADICAND_TOL) {
        return Err(Error::NotDiagonallyDominant { row });
    }
    let m = g.size();
    let mut rows = Vec::new();
    let mut covered = vec![0.0; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let z = g.get(i, j);
            let r = z.norm();
            if r <= PAIR_CUTOFF {
                continue;
            }
            // atan2 already lands in (-pi, pi]
            let theta = z.arg();
            let s = r.sqrt();
            rows.push(SparseRow {
                entries: vec![
                    (i, Complex64::from_polar(s, -theta / 2.0)),
                    (j, Complex64::from_polar(s, theta / 2.0)),
                ],
            });
            covered[i] += r;
            covered[j] += r;
        }
    }
    for i in 0..m {
        let radicand = g.get(i, i).re - covered[i];
        if radicand < -RADICAND_TOL {
            return Err(Error::NegativeRadicand { row: i, value: radicand });
        }
        if radicand > PAIR_CUTOFF {
            rows.push(SparseRow {
                entries: vec![(i, Complex64::new(radicand.sqrt(), 0.0))],
            });
        }
    }
    Ok(SparseFactor { ncols: m, rows })
}

pub fn max_nonzeros_per_row(v: &SparseFactor, tol: f64) -> usize {
    v.rows
        .iter()
        .map(|r| r.entries.iter().filter(|(_, z)| z.norm() > tol).count())
        .max()
        .unwrap_or(0)
}

/// Comparison matrix `M(G)`: `|g_ii|` on the diagonal, `-|g_ij|` elsewhere.
pub fn comparison_matrix(g: &GramMatrix) -> RMatrix {
    let m = g.size();
    RMatrix::from_fn(m, m, |i, j| {
        let a = g.get(i, j).norm();
        if i == j {
            a
        } else {
            -a
        }
    })
}

/// Factor width at most two, tested as positive semidefiniteness of the
/// comparison matrix (generalized diagonal dominance).
pub fn is_factor_width_two(g: &GramMatrix, tol: f64) -> bool {
    min_eigenvalue(&comparison_matrix(g)) >= -tol
}
