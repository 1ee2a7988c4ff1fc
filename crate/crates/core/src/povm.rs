// SPDX-License-Identifier: Apache-2.0

//! Explicit list-2 measurements for codes with diagonally dominant Gram
//! matrices, and a verifier for arbitrary list measurements.
//!
//! Operators live in an orthonormal frame of the span of the codeword states:
//! with `G = L L^dagger` (Cholesky), the columns of `R = L^dagger` are the
//! state coordinates, and the dual vectors `psi_hat = Psi G^{-1}` have
//! coordinates `R G^{-1}`. For a factor row `v_k` of `G = V^dagger V` the
//! outcome vector is `e_k = sum_i conj(v_ki) psi_hat_i`, so that
//! `<psi_m|e_k> = conj(v_km)` vanishes outside the row's support and
//! `sum_k |e_k><e_k| = Psi G^{-1} Psi^dagger`, the projector onto the span.

use std::collections::BTreeMap;

use nalgebra::Cholesky;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{factor_diag_dominant, GramMatrix};
use crate::linalg::{
    complex_matmul, hermitian_eigh, hermitian_min_eigenvalue, max_abs_diff, outer_gram, CMatrix, CVector,
};
use crate::rng::stream;

/// Condition number above which a Gram matrix is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Measurement operator, either rank-one `|v><v|` or a dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    #[serde(rename = "vector", with = "serde_vector")]
    RankOne(CVector),
    #[serde(rename = "op", with = "crate::serde_matrix::complex")]
    Dense(CMatrix),
}

impl Operator {
    pub fn dim(&self) -> usize {
        match self {
            Operator::RankOne(v) => v.len(),
            Operator::Dense(m) => m.nrows(),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            Operator::RankOne(v) => v * v.adjoint(),
            Operator::Dense(m) => m.clone(),
        }
    }

    /// `target += scale * self`.
    pub fn add_to(&self, target: &mut CMatrix, scale: f64) {
        match self {
            Operator::RankOne(v) => {
                let s = num_complex::Complex64::new(scale, 0.0);
                target.gerc(s, v, v, num_complex::Complex64::new(1.0, 0.0));
            }
            Operator::Dense(m) => *target += m * num_complex::Complex64::new(scale, 0.0),
        }
    }

    /// `<f|E|f>`, real part.
    pub fn expectation(&self, f: &CVector) -> f64 {
        match self {
            Operator::RankOne(v) => v.dotc(f).norm_sqr(),
            Operator::Dense(m) => f.dotc(&(m * f)).re,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            Operator::RankOne(_) => 0.0,
            Operator::Dense(m) => {
                let skew = max_abs_diff(m, &m.adjoint());
                hermitian_min_eigenvalue(m) - skew
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Operator {
        match self {
            Operator::RankOne(v) => Operator::RankOne(v * num_complex::Complex64::new(factor.sqrt(), 0.0)),
            Operator::Dense(m) => Operator::Dense(m * num_complex::Complex64::new(factor, 0.0)),
        }
    }
}

mod serde_vector {
    use num_complex::Complex64;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::CVector;

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVector, D::Error> {
        let v = Vec::<[f64; 2]>::deserialize(d)?;
        if v.iter().flatten().any(|x| !x.is_finite()) {
            return Err(D::Error::custom("non-finite vector entry"));
        }
        Ok(CVector::from_iterator(v.len(), v.iter().map(|p| Complex64::new(p[0], p[1]))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// Sorted message indices output by this outcome.
    pub label: Vec<usize>,
    #[serde(flatten)]
    pub operator: Operator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListMeasurement {
    pub subspace_dim: usize,
    /// Column `i` holds the coordinates of message state `i`.
    #[serde(with = "crate::serde_matrix::complex")]
    pub frame: CMatrix,
    pub outcomes: Vec<Outcome>,
}

impl ListMeasurement {
    pub fn messages(&self) -> usize {
        self.frame.ncols()
    }

    /// Same measurement with every operator stored densely.
    pub fn to_dense(&self) -> ListMeasurement {
        ListMeasurement {
            outcomes: self
                .outcomes
                .iter()
                .map(|o| Outcome {
                    label: o.label.clone(),
                    operator: Operator::Dense(o.operator.to_dense()),
                })
                .collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub psd_tol: f64,
    pub completeness_tol: f64,
    pub zero_error_tol: f64,
    /// Tolerance for `frame^dagger frame = G`.
    pub frame_tol: f64,
    /// Pad labels to exactly `L` and check `sum_i F_i = L 1`.
    pub pad_labels: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            psd_tol: 1e-10,
            completeness_tol: 1e-9,
            zero_error_tol: 1e-9,
            frame_tol: 1e-9,
            pad_labels: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub complete: bool,
    pub positive: bool,
    pub zero_error: bool,
    pub max_list_size: usize,
    /// `Tr[rho_i F_i]` per message.
    pub per_message_success: Vec<f64>,
    pub fi_sum_check: Option<bool>,
    /// `max |sum E - 1|` on the subspace.
    pub completeness_residual: f64,
    pub min_operator_eigenvalue: f64,
}

impl VerificationReport {
    /// Zero error with every list within `list_size`.
    pub fn passes(&self, list_size: usize) -> bool {
        self.complete && self.positive && self.zero_error && self.max_list_size <= list_size
    }
}

/// Upper-triangular `R` with `R^dagger R = G`.
fn state_frame(g: &GramMatrix) -> Result<CMatrix> {
    let chol = Cholesky::new(g.matrix().clone()).ok_or(Error::IllConditioned(f64::INFINITY))?;
    Ok(chol.l().adjoint())
}

/// `G^{-1}`: column `i` holds the coefficients of the dual vector
/// `psi_hat_i` on the codeword states.
pub fn dual_basis(g: &GramMatrix) -> Result<CMatrix> {
    let m = g.size();
    let (values, _) = hermitian_eigh(g.matrix());
    let (lo, hi) = match (values.first(), values.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Ok(CMatrix::zeros(0, 0)),
    };
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let inv = g
        .matrix()
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditioned(f64::INFINITY))?;
    let residual = max_abs_diff(&(&inv * g.matrix()), &CMatrix::identity(m, m));
    if residual > 1e-9 {
        return Err(Error::IllConditioned(cond));
    }
    Ok(inv)
}

/// List-2 measurement derived from the sparse factorization of `g`.
pub fn build_povm(g: &GramMatrix) -> Result<ListMeasurement> {
    let factor = factor_diag_dominant(g)?;
    let inv = dual_basis(g)?;
    let frame = state_frame(g)?;
    let duals = complex_matmul(&frame, &inv);
    let outcomes = factor
        .rows
        .iter()
        .map(|row| {
            let mut e = CVector::zeros(g.size());
            for &(i, v) in &row.entries {
                e += duals.column(i) * v.conj();
            }
            Outcome {
                label: row.columns(),
                operator: Operator::RankOne(e),
            }
        })
        .collect();
    Ok(ListMeasurement {
        subspace_dim: g.size(),
        frame,
        outcomes,
    })
}

fn check_shapes(m: &ListMeasurement, g: &GramMatrix) -> Result<()> {
    let d = m.subspace_dim;
    if m.frame.nrows() != d || m.frame.ncols() != g.size() {
        return Err(Error::Shape(format!(
            "frame is {}x{}, expected {d}x{}",
            m.frame.nrows(),
            m.frame.ncols(),
            g.size()
        )));
    }
    for (k, o) in m.outcomes.iter().enumerate() {
        if o.operator.dim() != d {
            return Err(Error::Shape(format!("outcome {k} has dimension {}", o.operator.dim())));
        }
        if let Operator::Dense(e) = &o.operator {
            if e.ncols() != d {
                return Err(Error::Shape(format!("outcome {k} is not square")));
            }
        }
        if let Some(&i) = o.label.iter().find(|&&i| i >= g.size()) {
            return Err(Error::MessageOutOfRange { index: i, size: g.size() });
        }
    }
    Ok(())
}

fn check_frame(m: &ListMeasurement, g: &GramMatrix, tol: f64) -> Result<()> {
    let residual = max_abs_diff(&complex_matmul(&m.frame.adjoint(), &m.frame), g.matrix());
    if residual > tol {
        return Err(Error::Shape(format!(
            "frame is inconsistent with the Gram matrix (residual {residual:e})"
        )));
    }
    Ok(())
}

/// `F_i = sum_{l containing i} E_l`, with labels optionally padded to size
/// `pad` by appending the smallest missing message indices.
pub fn list_operators(m: &ListMeasurement, pad: Option<usize>) -> Vec<CMatrix> {
    let d = m.subspace_dim;
    let mut f = vec![CMatrix::zeros(d, d); m.messages()];
    let mut columns: Vec<Vec<&CVector>> = vec![Vec::new(); m.messages()];
    for o in &m.outcomes {
        for i in padded_label(&o.label, pad, m.messages()) {
            match &o.operator {
                Operator::RankOne(v) => columns[i].push(v),
                dense => dense.add_to(&mut f[i], 1.0),
            }
        }
    }
    for (fi, cols) in f.iter_mut().zip(&columns) {
        if !cols.is_empty() {
            let v = CMatrix::from_iterator(d, cols.len(), cols.iter().flat_map(|c| c.iter().copied()));
            *fi += outer_gram(&v);
        }
    }
    f
}

fn padded_label(label: &[usize], pad: Option<usize>, messages: usize) -> Vec<usize> {
    let mut out = label.to_vec();
    if let Some(size) = pad {
        let mut next = 0;
        while out.len() < size && next < messages {
            if !label.contains(&next) {
                out.push(next);
            }
            next += 1;
        }
    }
    out
}

/// `sum_l w(l) E_l`; rank-one terms are batched into one `V V^dagger` product.
fn weighted_sum(m: &ListMeasurement, w: impl Fn(&Outcome) -> f64) -> CMatrix {
    let d = m.subspace_dim;
    let mut total = CMatrix::zeros(d, d);
    let mut columns = Vec::new();
    for o in &m.outcomes {
        match &o.operator {
            Operator::RankOne(v) => columns.push(v * num_complex::Complex64::new(w(o).sqrt(), 0.0)),
            dense => dense.add_to(&mut total, w(o)),
        }
    }
    if !columns.is_empty() {
        let v = CMatrix::from_columns(&columns);
        total += outer_gram(&v);
    }
    total
}

pub fn verify_povm(m: &ListMeasurement, g: &GramMatrix, list_size: usize) -> Result<VerificationReport> {
    verify_povm_with(m, g, list_size, &VerifyOptions::default())
}

pub fn verify_povm_with(
    m: &ListMeasurement,
    g: &GramMatrix,
    list_size: usize,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    if list_size == 0 {
        return Err(Error::InvalidListSize(0));
    }
    check_shapes(m, g)?;
    check_frame(m, g, opts.frame_tol)?;
    let d = m.subspace_dim;

    let min_operator_eigenvalue = m
        .outcomes
        .iter()
        .map(|o| o.operator.min_eigenvalue())
        .fold(f64::INFINITY, f64::min);
    let positive = !(min_operator_eigenvalue < -opts.psd_tol);

    let total = weighted_sum(m, |_| 1.0);
    let completeness_residual = max_abs_diff(&total, &CMatrix::identity(d, d));
    let complete = completeness_residual <= opts.completeness_tol;

    let per_message_success: Vec<f64> = (0..m.messages())
        .map(|i| {
            let f = m.frame.column(i).into_owned();
            m.outcomes
                .iter()
                .filter(|o| o.label.contains(&i))
                .map(|o| o.operator.expectation(&f))
                .sum()
        })
        .collect();
    let zero_error = per_message_success
        .iter()
        .all(|&s| s >= 1.0 - opts.zero_error_tol);
    let max_list_size = m.outcomes.iter().map(|o| o.label.len()).max().unwrap_or(0);

    let fi_sum_check = if opts.pad_labels {
        if max_list_size > list_size || list_size > m.messages() {
            Some(false)
        } else {
            // sum_i F_i = sum_l |padded label_l| E_l
            let messages = m.messages();
            let sum = weighted_sum(m, |o| padded_label(&o.label, Some(list_size), messages).len() as f64);
            let target = CMatrix::identity(d, d) * num_complex::Complex64::new(list_size as f64, 0.0);
            Some(max_abs_diff(&sum, &target) <= opts.completeness_tol * list_size as f64)
        }
    } else {
        None
    };

    Ok(VerificationReport {
        complete,
        positive,
        zero_error,
        max_list_size,
        per_message_success,
        fi_sum_check,
        completeness_residual,
        min_operator_eigenvalue,
    })
}

/// Born-rule sampling of `shots` outcomes for `message`; returns counts per
/// label. Outcomes sharing a label are merged.
pub fn simulate_decode(
    m: &ListMeasurement,
    g: &GramMatrix,
    message: usize,
    shots: usize,
    seed: u64,
) -> Result<BTreeMap<Vec<usize>, u64>> {
    check_shapes(m, g)?;
    check_frame(m, g, VerifyOptions::default().frame_tol)?;
    if message >= m.messages() {
        return Err(Error::MessageOutOfRange {
            index: message,
            size: m.messages(),
        });
    }
    let f = m.frame.column(message).into_owned();
    let probs: Vec<f64> = m.outcomes.iter().map(|o| o.operator.expectation(&f).max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::ProbabilitySum(total));
    }
    let dist = WeightedIndex::new(&probs).map_err(|_| Error::ProbabilitySum(total))?;
    let mut rng = stream(seed, message as u64);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let k = dist.sample(&mut rng);
        *counts.entry(m.outcomes[k].label.clone()).or_insert(0) += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::trine_channel;
    use crate::linalg::complexify;
    use crate::linalg::RMatrix;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn half() -> GramMatrix {
        GramMatrix::from_real(&RMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0])).unwrap()
    }

    fn random_dominant(rng: &mut ChaCha8Rng, m: usize) -> GramMatrix {
        let mut g = CMatrix::identity(m, m);
        for i in 0..m {
            for j in (i + 1)..m {
                let z = Complex64::from_polar(rng.random_range(0.0..1.0), rng.random_range(-3.2..3.2));
                g[(i, j)] = z;
                g[(j, i)] = z.conj();
            }
        }
        // scale the off-diagonal part so every row sum is at most 1
        let worst = (0..m)
            .map(|i| (0..m).filter(|&j| j != i).map(|j| g[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let s = rng.random_range(0.3..1.0) / worst.max(1.0);
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    g[(i, j)] *= s;
                }
            }
        }
        GramMatrix::new(g).unwrap()
    }

    #[test]
    fn dual_of_half() {
        let inv = dual_basis(&half()).unwrap();
        let expected = complexify(&RMatrix::from_row_slice(2, 2, &[4.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0, 4.0 / 3.0]));
        assert!(max_abs_diff(&inv, &expected) < 1e-14);
        assert_eq!(dual_basis(&GramMatrix::identity(3)).unwrap(), CMatrix::identity(3, 3));
    }

    #[test]
    fn singular_gram_rejected() {
        let ones = GramMatrix::from_real(&RMatrix::from_element(2, 2, 1.0)).unwrap();
        assert!(matches!(dual_basis(&ones), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn half_povm() {
        let g = half();
        let m = build_povm(&g).unwrap();
        let labels: Vec<_> = m.outcomes.iter().map(|o| o.label.clone()).collect();
        assert_eq!(labels, vec![vec![0, 1], vec![0], vec![1]]);
        let r = verify_povm(&m, &g, 2).unwrap();
        assert!(r.passes(2) && r.fi_sum_check == Some(true));

        // Born probabilities are |v_k0|^2: 1/2 for {0,1}, 1/2 for {0}
        let counts = simulate_decode(&m, &g, 0, 100_000, 5).unwrap();
        assert!(!counts.contains_key(&vec![1]));
        let pair = counts[&vec![0, 1]] as f64 / 1e5;
        assert!((pair - 0.5).abs() < 0.01, "{pair}");
    }

    #[test]
    fn identity_povm_is_singletons() {
        let g = GramMatrix::identity(3);
        let m = build_povm(&g).unwrap();
        assert!(m.outcomes.iter().all(|o| o.label.len() == 1));
        let counts = simulate_decode(&m, &g, 1, 1000, 0).unwrap();
        assert_eq!(counts.get(&vec![1]), Some(&1000));
        let r = verify_povm(&m, &g, 1).unwrap();
        assert!(r.passes(1));
    }

    #[test]
    fn random_dominant_povms() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let size = rng.random_range(1..=20);
            let g = random_dominant(&mut rng, size);
            let inv = dual_basis(&g).unwrap();
            assert!(max_abs_diff(&(&inv * g.matrix()), &CMatrix::identity(size, size)) < 1e-9);
            let m = build_povm(&g).unwrap();
            let r = verify_povm(&m, &g, 2).unwrap();
            assert!(r.completeness_residual <= 1e-9, "{}", r.completeness_residual);
            assert!(r.passes(2));
            assert_eq!(r.fi_sum_check, Some(size >= 2));
            assert!(r.per_message_success.iter().all(|&s| s >= 1.0 - 1e-9));
        }
    }

    #[test]
    fn factor_rows_match_outcome_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_dominant(&mut rng, 7);
        let v = factor_diag_dominant(&g).unwrap();
        let m = build_povm(&g).unwrap();
        assert_eq!(v.rows.len(), m.outcomes.len());
        for i in 0..7 {
            let f = m.frame.column(i).into_owned();
            let mut total = 0.0;
            for (row, o) in v.rows.iter().zip(&m.outcomes) {
                assert_eq!(row.columns(), o.label);
                let vki = row.entries.iter().find(|e| e.0 == i).map_or(0.0, |e| e.1.norm_sqr());
                assert!((o.operator.expectation(&f) - vki).abs() < 1e-10);
                total += vki;
            }
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_message_is_not_zero_error() {
        let g = GramMatrix::identity(2);
        let m = ListMeasurement {
            subspace_dim: 2,
            frame: CMatrix::identity(2, 2),
            outcomes: vec![Outcome {
                label: vec![0],
                operator: Operator::Dense(CMatrix::identity(2, 2)),
            }],
        };
        let r = verify_povm(&m, &g, 2).unwrap();
        assert!(r.complete && r.positive && !r.zero_error);
        assert_eq!(r.per_message_success, vec![1.0, 0.0]);
    }

    #[test]
    fn padded_singletons_sum_to_two() {
        let g = GramMatrix::identity(2);
        let m = build_povm(&g).unwrap();
        let f = list_operators(&m, Some(2));
        let sum = &f[0] + &f[1];
        assert!(max_abs_diff(&sum, &(CMatrix::identity(2, 2) * Complex64::new(2.0, 0.0))) < 1e-15);
        assert_eq!(verify_povm(&m, &g, 2).unwrap().fi_sum_check, Some(true));
    }

    #[test]
    fn scaled_operator_breaks_completeness() {
        let g = half();
        let mut m = build_povm(&g).unwrap().to_dense();
        m.outcomes[0].operator = m.outcomes[0].operator.scaled(1.1);
        let r = verify_povm(&m, &g, 2).unwrap();
        assert!(!r.complete && !r.passes(2));
    }

    #[test]
    fn dense_and_rank_one_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_dominant(&mut rng, 6);
        let m = build_povm(&g).unwrap();
        let a = verify_povm(&m, &g, 2).unwrap();
        let b = verify_povm(&m.to_dense(), &g, 2).unwrap();
        assert_eq!((a.complete, a.positive, a.zero_error), (b.complete, b.positive, b.zero_error));
        for (x, y) in a.per_message_success.iter().zip(&b.per_message_success) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(b.min_operator_eigenvalue > -1e-10);
    }

    #[test]
    fn trine_typewriter_measurement() {
        // 2/3 |phi_x><phi_x| with phi_x orthogonal to psi_x excludes message x
        let t = trine_channel();
        let frame = CMatrix::from_fn(2, 3, |r, c| t.state(c)[r]);
        let g = GramMatrix::new(frame.adjoint() * &frame).unwrap();
        let outcomes = (0..3)
            .map(|x| {
                let s = t.state(x);
                let phi = CVector::from_vec(vec![-s[1], s[0]]) * Complex64::new((2.0f64 / 3.0).sqrt(), 0.0);
                let mut label: Vec<usize> = (0..3).filter(|&y| y != x).collect();
                label.sort_unstable();
                Outcome {
                    label,
                    operator: Operator::RankOne(phi),
                }
            })
            .collect();
        let m = ListMeasurement {
            subspace_dim: 2,
            frame,
            outcomes,
        };
        let r = verify_povm(&m, &g, 2).unwrap();
        assert!(r.completeness_residual < 1e-15);
        assert!(r.passes(2));
        assert_eq!(r.fi_sum_check, Some(true));
    }

    #[test]
    fn inconsistent_frame_is_rejected() {
        let g = half();
        let mut m = build_povm(&g).unwrap();
        m.frame = CMatrix::identity(2, 2);
        assert!(matches!(verify_povm(&m, &g, 2), Err(Error::Shape(_))));
    }

    #[test]
    fn json_round_trip() {
        let m = build_povm(&half()).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"vector\""));
        let back: ListMeasurement = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        let dense = serde_json::to_string(&m.to_dense()).unwrap();
        assert!(dense.contains("\"op\""));
        let back: ListMeasurement = serde_json::from_str(&dense).unwrap();
        assert_eq!(back, m.to_dense());
    }
}
