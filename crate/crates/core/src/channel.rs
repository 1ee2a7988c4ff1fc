// SPDX-License-Identifier: Apache-2.0

//! Pure-state classical-quantum channels and their overlap structure.
//!
//! A channel is a finite list of unit vectors `|psi_x>` in `C^dim`, one per
//! input symbol. Density matrices are rank-one and never materialized; every
//! quantity in the crate factors through the inner products `<psi_x|psi_x'>`.

use std::collections::VecDeque;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, min_eigenvalue, CVector, RMatrix};

/// Normalization slack accepted by [`make_channel`].
pub const NORM_TOL: f64 = 1e-9;

/// Default tolerance for the structural predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Factors below this modulus make a codeword overlap exactly zero.
const UNDERFLOW_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    dim: usize,
    states: Vec<CVector>,
}

impl ChannelSpec {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet_size(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[CVector] {
        &self.states
    }

    pub fn state(&self, x: usize) -> &CVector {
        &self.states[x]
    }

    /// `<psi_x|psi_y>`.
    pub fn overlap(&self, x: usize, y: usize) -> Complex64 {
        inner(&self.states[x], &self.states[y])
    }

    /// Same channel with every state multiplied by the given unit-modulus phase.
    pub fn rephased(&self, phases: &[Complex64]) -> Result<ChannelSpec> {
        if phases.len() != self.states.len() {
            return Err(Error::Shape(format!(
                "{} phases for {} states",
                phases.len(),
                self.states.len()
            )));
        }
        let states = self
            .states
            .iter()
            .zip(phases)
            .map(|(s, &a)| s.map(|z| z * a))
            .collect();
        Ok(ChannelSpec { dim: self.dim, states })
    }
}

/// Symmetric matrix of absolute overlaps `|<psi_x|psi_x'>|`, unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix(RMatrix);

impl OverlapMatrix {
    pub fn matrix(&self) -> &RMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> RMatrix {
        self.0
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAssignment {
    phases: Vec<Complex64>,
}

impl PhaseAssignment {
    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }
}

/// Edge set on which gauge fixing is impossible: a cycle `v0 -> v1 -> ... -> v0`
/// whose product of overlap phases is not 1, or an edge whose realigned inner
/// product is negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionWitness {
    pub cycle: Vec<usize>,
    /// Realigned inner product on the closing edge `(cycle.last(), cycle[0])`.
    pub closing_value: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum NonObtuseResult {
    Aligned(PhaseAssignment),
    Obstructed(ObstructionWitness),
}

impl NonObtuseResult {
    pub fn is_aligned(&self) -> bool {
        matches!(self, NonObtuseResult::Aligned(_))
    }
}

/// Validates and normalizes a list of state vectors.
pub fn make_channel(vectors: Vec<Vec<Complex64>>) -> Result<ChannelSpec> {
    let first = vectors.first().ok_or(Error::EmptyChannel)?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::DimensionMismatch {
            index: 0,
            expected: 1,
            found: 0,
        });
    }
    let mut states = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.into_iter().enumerate() {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                index,
                expected: dim,
                found: v.len(),
            });
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(index));
        }
        let v = CVector::from_vec(v);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector(index));
        }
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized {
                index,
                norm,
                tol: NORM_TOL,
            });
        }
        states.push(v.unscale(norm));
    }
    Ok(ChannelSpec { dim, states })
}

/// Convenience constructor from real amplitudes.
pub fn make_real_channel(vectors: &[Vec<f64>]) -> Result<ChannelSpec> {
    make_channel(
        vectors
            .iter()
            .map(|v| v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect(),
    )
}

/// Three planar qubit states at mutual angles of 120 degrees.
pub fn trine_channel() -> ChannelSpec {
    let h = 3f64.sqrt() / 2.0;
    make_real_channel(&[vec![1.0, 0.0], vec![-0.5, h], vec![-0.5, -h]])
        .expect("trine states are unit vectors")
}

/// Two real qubit states with `<psi_0|psi_1> = c`.
pub fn binary_channel(c: f64) -> Result<ChannelSpec> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::OverlapOutOfRange(c));
    }
    let s = (1.0 - c * c).max(0.0).sqrt();
    make_real_channel(&[vec![1.0, 0.0], vec![c, s]])
}

/// The computational basis of `C^d`, one symbol per basis vector.
pub fn orthonormal_channel(d: usize) -> Result<ChannelSpec> {
    if d == 0 {
        return Err(Error::EmptyChannel);
    }
    make_real_channel(
        &(0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect::<Vec<_>>(),
    )
}

/// Haar-like random channel: i.i.d. complex Gaussian amplitudes, normalized.
pub fn random_channel<R: Rng + ?Sized>(alphabet: usize, dim: usize, rng: &mut R) -> ChannelSpec {
    assert!(alphabet >= 1 && dim >= 1);
    let states = (0..alphabet)
        .map(|_| loop {
            let v = CVector::from_fn(dim, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let n = v.norm();
            if n > 1e-6 {
                break v.unscale(n);
            }
        })
        .collect();
    ChannelSpec { dim, states }
}

pub fn absolute_overlap_matrix(ch: &ChannelSpec) -> OverlapMatrix {
    let k = ch.alphabet_size();
    let mut a = RMatrix::identity(k, k);
    for x in 0..k {
        for y in (x + 1)..k {
            let v = ch.overlap(x, y).norm().min(1.0);
            a[(x, y)] = v;
            a[(y, x)] = v;
        }
    }
    OverlapMatrix(a)
}

fn check_sequences(ch: &ChannelSpec, xs: &[usize], ys: &[usize]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.is_empty() {
        return Err(Error::Shape("empty symbol sequence".into()));
    }
    let alphabet = ch.alphabet_size();
    if let Some(&symbol) = xs.iter().chain(ys).find(|&&s| s >= alphabet) {
        return Err(Error::SymbolOutOfRange { symbol, alphabet });
    }
    Ok(())
}

/// `|<psi_xs|psi_ys>|` for product states, accumulated in the log domain.
pub fn codeword_abs_overlap(ch: &ChannelSpec, xs: &[usize], ys: &[usize]) -> Result<f64> {
    check_sequences(ch, xs, ys)?;
    let mut log_sum = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        if x == y {
            continue;
        }
        let r = ch.overlap(x, y).norm();
        if r < UNDERFLOW_FLOOR {
            return Ok(0.0);
        }
        log_sum += r.min(1.0).ln();
    }
    Ok(log_sum.exp())
}

/// `<psi_xs|psi_ys>` with its phase, as (log-modulus, phase). Log-modulus is
/// `-inf` when some factor vanishes.
pub fn codeword_overlap_polar(ch: &ChannelSpec, xs: &[usize], ys: &[usize]) -> Result<(f64, f64)> {
    check_sequences(ch, xs, ys)?;
    let mut log_sum = 0.0;
    let mut phase = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        if x == y {
            continue;
        }
        let z = ch.overlap(x, y);
        let r = z.norm();
        if r < UNDERFLOW_FLOOR {
            return Ok((f64::NEG_INFINITY, 0.0));
        }
        log_sum += r.min(1.0).ln();
        phase += z.arg();
    }
    Ok((log_sum, phase))
}

/// Smallest eigenvalue of the absolute overlap matrix.
pub fn abs_overlap_min_eigenvalue(ch: &ChannelSpec) -> f64 {
    min_eigenvalue(absolute_overlap_matrix(ch).matrix())
}

pub fn is_psd_absolute_overlaps(ch: &ChannelSpec, tol: f64) -> bool {
    abs_overlap_min_eigenvalue(ch) >= -tol
}

/// Searches for phases `alpha_x` making every `<alpha_x psi_x|alpha_y psi_y>`
/// real and non-negative.
///
/// Symbols are joined by an edge when their overlap exceeds `tol` in modulus.
/// Each connected component is gauge-fixed along a BFS tree so that tree edges
/// become real positive; the remaining pairs are then checked.
pub fn pairwise_non_obtuse_phases(ch: &ChannelSpec, tol: f64) -> NonObtuseResult {
    let k = ch.alphabet_size();
    let gram: Vec<Vec<Complex64>> = (0..k)
        .map(|x| (0..k).map(|y| ch.overlap(x, y)).collect())
        .collect();
    let mut phases = vec![Complex64::new(1.0, 0.0); k];
    let mut parent: Vec<Option<usize>> = vec![None; k];
    let mut depth = vec![0usize; k];
    let mut seen = vec![false; k];

    for root in 0..k {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for v in 0..k {
                if seen[v] || gram[u][v].norm() <= tol {
                    continue;
                }
                seen[v] = true;
                parent[v] = Some(u);
                depth[v] = depth[u] + 1;
                // conj(a_u) a_v <psi_u|psi_v> must be real positive
                let z = gram[u][v];
                phases[v] = phases[u] * (z.conj() / z.norm());
                queue.push_back(v);
            }
        }
    }

    for x in 0..k {
        for y in (x + 1)..k {
            let z = phases[x].conj() * phases[y] * gram[x][y];
            if z.re >= -tol && z.im.abs() <= tol {
                continue;
            }
            return NonObtuseResult::Obstructed(ObstructionWitness {
                cycle: tree_cycle(&parent, &depth, x, y),
                closing_value: [z.re, z.im],
            });
        }
    }
    NonObtuseResult::Aligned(PhaseAssignment { phases })
}

/// Path `x -> ... -> lca -> ... -> y` through the BFS forest; the failing
/// edge `(y, x)` closes it into a cycle.
fn tree_cycle(parent: &[Option<usize>], depth: &[usize], x: usize, y: usize) -> Vec<usize> {
    let (mut a, mut b) = (x, y);
    let mut up = vec![a];
    let mut down = vec![b];
    while a != b {
        if depth[a] >= depth[b] {
            match parent[a] {
                Some(p) => a = p,
                None => break,
            }
            up.push(a);
        } else {
            match parent[b] {
                Some(p) => b = p,
                None => break,
            }
            down.push(b);
        }
    }
    if a == b {
        down.pop();
    }
    up.extend(down.into_iter().rev());
    up
}
