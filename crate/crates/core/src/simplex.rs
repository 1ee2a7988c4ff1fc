// SPDX-License-Identifier: Apache-2.0

//! Quadratic forms `P^T A P` over the probability simplex.
//!
//! Small alphabets are solved exactly by enumerating supports and solving the
//! KKT system on each one; this covers indefinite `A` where the problem is
//! nonconvex. Larger alphabets fall back to multi-start away-step Frank-Wolfe,
//! which is only certified for PSD `A`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RMatrix;

const NORMALIZATION_TOL: f64 = 1e-12;

/// A probability vector over the input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexDistribution(Vec<f64>);

impl SimplexDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self(probs))
    }

    /// Rescales nonnegative weights onto the simplex.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidDistribution("weights must be nonnegative with positive sum".into()));
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k > 0);
        Self(vec![1.0 / k as f64; k])
    }

    pub fn vertex(k: usize, x: usize) -> Self {
        let mut p = vec![0.0; k];
        p[x] = 1.0;
        Self(p)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > tol)
            .map(|(i, _)| i)
            .collect()
    }
}

impl TryFrom<Vec<f64>> for SimplexDistribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        // 12-digit serialization can move the sum by a few ulps past 1e-12
        let sum: f64 = v.iter().sum();
        let valid = v.iter().all(|p| p.is_finite() && *p >= 0.0);
        if valid && (sum - 1.0).abs() > NORMALIZATION_TOL && (sum - 1.0).abs() <= 1e-9 {
            Self::from_weights(&v)
        } else {
            Self::new(v)
        }
    }
}

impl From<SimplexDistribution> for Vec<f64> {
    fn from(p: SimplexDistribution) -> Vec<f64> {
        p.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MinMethod {
    ExactEnumeration,
    FrankWolfe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexMinResult {
    pub minimizer: SimplexDistribution,
    pub value: f64,
    pub method: MinMethod,
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Alphabets up to this size are solved by support enumeration.
    pub exact_threshold: usize,
    pub starts: usize,
    pub max_iter: usize,
    /// Frank-Wolfe gap at which a start is considered converged.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            exact_threshold: 12,
            starts: 32,
            max_iter: 10_000,
            tol: 1e-10,
            seed: 0,
        }
    }
}

/// Row cap for [`kronecker_power`].
pub const KRONECKER_ROW_CAP: usize = 4096;

pub fn quadratic_form(a: &RMatrix, p: &SimplexDistribution) -> Result<f64> {
    if !a.is_square() || a.nrows() != p.len() {
        return Err(Error::Shape(format!(
            "{}x{} matrix against distribution of length {}",
            a.nrows(),
            a.ncols(),
            p.len()
        )));
    }
    Ok(quad(a, p.probs()))
}

fn quad(a: &RMatrix, p: &[f64]) -> f64 {
    let k = p.len();
    let mut total = 0.0;
    for x in 0..k {
        if p[x] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for y in 0..k {
            row += a[(x, y)] * p[y];
        }
        total += p[x] * row;
    }
    total
}

/// Global minimum of `P^T A P` over the simplex.
pub fn min_quadratic_over_simplex(a: &RMatrix, opts: &SimplexOptions) -> Result<SimplexMinResult> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::Shape(format!("{}x{} matrix", a.nrows(), a.ncols())));
    }
    let a = crate::linalg::symmetrize(a);
    if a.nrows() <= opts.exact_threshold {
        Ok(exact_enumeration(&a))
    } else {
        Ok(frank_wolfe_multistart(&a, opts))
    }
}

struct Candidate {
    probs: Vec<f64>,
    value: f64,
    support: Vec<usize>,
}

fn exact_enumeration(a: &RMatrix) -> SimplexMinResult {
    let k = a.nrows();
    let mut best: Option<Candidate> = None;
    for mask in 1u64..(1u64 << k) {
        let support: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
        let Some(probs) = stationary_point(a, &support) else {
            continue;
        };
        let value = quad(a, &probs);
        let better = match &best {
            None => true,
            Some(b) => {
                let scale = 1e-13 * value.abs().max(b.value.abs()).max(1.0);
                value < b.value - scale || (value <= b.value + scale && support < b.support)
            }
        };
        if better {
            best = Some(Candidate {
                probs,
                value,
                support,
            });
        }
    }
    // vertices always yield a stationary point, so `best` is set
    let best = best.expect("at least one vertex candidate");
    SimplexMinResult {
        minimizer: SimplexDistribution(best.probs),
        value: best.value,
        method: MinMethod::ExactEnumeration,
        support: best.support,
    }
}

/// Solves `A_SS p = mu 1, 1^T p = 1` and returns the full-length `p` when it
/// is strictly positive on `S`.
fn stationary_point(a: &RMatrix, support: &[usize]) -> Option<Vec<f64>> {
    let s = support.len();
    let k = a.nrows();
    if s == 1 {
        let mut p = vec![0.0; k];
        p[support[0]] = 1.0;
        return Some(p);
    }
    let mut kkt = DMatrix::<f64>::zeros(s + 1, s + 1);
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            kkt[(r, c)] = a[(i, j)];
        }
        kkt[(r, s)] = -1.0;
        kkt[(s, r)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(s + 1);
    rhs[s] = 1.0;
    let lu = kkt.clone().full_piv_lu();
    let sol = lu.solve(&rhs)?;
    if !sol.iter().all(|v| v.is_finite()) {
        return None;
    }
    // reject numerically singular systems whose solution does not satisfy them
    let residual = (&kkt * &sol - &rhs).amax();
    if residual > 1e-9 {
        return None;
    }
    let mut p = vec![0.0; k];
    for (r, &i) in support.iter().enumerate() {
        if !(sol[r] > 0.0) {
            return None;
        }
        p[i] = sol[r];
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    Some(p)
}

fn frank_wolfe_multistart(a: &RMatrix, opts: &SimplexOptions) -> SimplexMinResult {
    let k = a.nrows();
    let mut starts: Vec<Vec<f64>> = (0..k)
        .map(|x| SimplexDistribution::vertex(k, x).0)
        .collect();
    starts.push(vec![1.0 / k as f64; k]);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.starts {
        // Dirichlet(1, ..., 1) via normalized exponentials
        let w: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
        let s: f64 = w.iter().sum();
        starts.push(w.into_iter().map(|v| v / s).collect());
    }
    let runs: Vec<(Vec<f64>, f64)> = starts
        .into_par_iter()
        .map(|p0| {
            let p = away_step_frank_wolfe(a, p0, opts.max_iter, opts.tol);
            let v = quad(a, &p);
            match active_set_polish(a, &p) {
                Some(q) if quad(a, &q) < v => {
                    let w = quad(a, &q);
                    (q, w)
                }
                _ => (p, v),
            }
        })
        .collect();
    // deterministic reduction in start order
    let (probs, value) = runs
        .into_iter()
        .reduce(|best, cur| if cur.1 < best.1 { cur } else { best })
        .expect("at least one start");
    let support = (0..k).filter(|&i| probs[i] > 1e-12).collect();
    SimplexMinResult {
        minimizer: SimplexDistribution(probs),
        value,
        method: MinMethod::FrankWolfe,
        support,
    }
}

fn away_step_frank_wolfe(a: &RMatrix, mut p: Vec<f64>, max_iter: usize, tol: f64) -> Vec<f64> {
    let k = p.len();
    let pv = DVector::from_column_slice(&p);
    let mut ap: Vec<f64> = (a * pv).iter().copied().collect();
    for _ in 0..max_iter {
        // gradient is 2 A p; the factor 2 is dropped throughout
        let (fw, _) = argmin(&ap, |_| true);
        let (away, _) = argmax(&ap, |i| p[i] > 0.0);
        let pap: f64 = p.iter().zip(&ap).map(|(x, y)| x * y).sum();
        let fw_gap = pap - ap[fw];
        if fw_gap <= tol {
            break;
        }
        let away_gap = ap[away] - pap;
        // direction d = e_fw - p (FW) or p - e_away (away)
        let (fw_step, gamma_max) = if fw_gap >= away_gap {
            (true, 1.0)
        } else {
            let pa = p[away];
            (false, if pa < 1.0 { pa / (1.0 - pa) } else { f64::INFINITY })
        };
        // f(p + g d) = f + 2 g d^T A p + g^2 d^T A d
        let (slope, curv) = if fw_step {
            (ap[fw] - pap, a[(fw, fw)] - 2.0 * ap[fw] + pap)
        } else {
            (pap - ap[away], pap - 2.0 * ap[away] + a[(away, away)])
        };
        let mut gamma = if curv > 0.0 { -slope / curv } else { gamma_max };
        if !gamma.is_finite() {
            gamma = 1.0;
        }
        gamma = gamma.clamp(0.0, gamma_max.min(1e12));
        if gamma == 0.0 {
            break;
        }
        if fw_step {
            for (i, v) in p.iter_mut().enumerate() {
                *v *= 1.0 - gamma;
                if i == fw {
                    *v += gamma;
                }
            }
            for (i, v) in ap.iter_mut().enumerate() {
                *v = (1.0 - gamma) * *v + gamma * a[(i, fw)];
            }
        } else {
            let drop_out = gamma >= gamma_max;
            for (i, v) in p.iter_mut().enumerate() {
                *v *= 1.0 + gamma;
                if i == away {
                    *v -= gamma;
                }
            }
            if drop_out {
                p[away] = 0.0;
            }
            for (i, v) in ap.iter_mut().enumerate() {
                *v = (1.0 + gamma) * *v - gamma * a[(i, away)];
            }
        }
        for v in p.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            p.iter_mut().for_each(|v| *v /= s);
            let pv = DVector::from_column_slice(&p);
            ap = (a * pv).iter().copied().collect();
        }
    }
    debug_assert_eq!(p.len(), k);
    p
}

/// Primal active-set refinement started from a feasible `p`. Each round
/// solves the equality-constrained problem on the current support through a
/// pseudo-inverse (valid for singular `A`), then either steps back to the
/// boundary or adds the coordinate with the most negative reduced gradient.
/// Returns `None` when a step fails to decrease the objective.
fn active_set_polish(a: &RMatrix, p: &[f64]) -> Option<Vec<f64>> {
    let k = a.nrows();
    let scale = a.amax().max(1e-300);
    let mut p = p.to_vec();
    let mut support: Vec<usize> = (0..k).filter(|&i| p[i] > 0.0).collect();
    for _ in 0..4 * k + 8 {
        let q = face_stationary_point(a, &support)?;
        let f_now = quad(a, &p);
        if support.iter().all(|&i| q[i] > 0.0) {
            if quad(a, &q) > f_now + 1e-15 * scale {
                return None;
            }
            p = q;
            let pv = DVector::from_column_slice(&p);
            let ap = a * pv;
            let mu = quad(a, &p);
            let (j, g) = argmin(ap.as_slice(), |i| !support.contains(&i));
            if j == usize::MAX || g >= mu - 1e-14 * scale {
                return Some(p);
            }
            support.push(j);
            support.sort_unstable();
        } else {
            // largest step toward q that keeps p feasible
            let t = support
                .iter()
                .filter(|&&i| q[i] <= 0.0)
                .map(|&i| p[i] / (p[i] - q[i]))
                .fold(1.0, f64::min);
            let next: Vec<f64> = p.iter().zip(&q).map(|(x, y)| (x + t * (y - x)).max(0.0)).collect();
            if quad(a, &next) > f_now + 1e-15 * scale {
                return None;
            }
            p = next;
            let before = support.len();
            support.retain(|&i| p[i] > 1e-15);
            for i in 0..k {
                if !support.contains(&i) {
                    p[i] = 0.0;
                }
            }
            if support.len() == before || support.is_empty() {
                return None;
            }
            let total: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= total);
        }
    }
    None
}

/// Least-squares solution of `A_SS q = mu 1, 1^T q = 1`, padded with zeros;
/// `None` when the system is inconsistent.
fn face_stationary_point(a: &RMatrix, support: &[usize]) -> Option<Vec<f64>> {
    let s = support.len();
    let mut kkt = DMatrix::<f64>::zeros(s + 1, s + 1);
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            kkt[(r, c)] = a[(i, j)];
        }
        kkt[(r, s)] = -1.0;
        kkt[(s, r)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(s + 1);
    rhs[s] = 1.0;
    let svd = kkt.clone().svd(true, true);
    let eps = 1e-12 * svd.singular_values.max();
    let sol = svd.solve(&rhs, eps).ok()?;
    if (&kkt * &sol - &rhs).amax() > 1e-9 {
        return None;
    }
    let mut q = vec![0.0; a.nrows()];
    for (r, &i) in support.iter().enumerate() {
        q[i] = sol[r];
    }
    Some(q)
}

fn argmin(v: &[f64], keep: impl Fn(usize) -> bool) -> (usize, f64) {
    v.iter()
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .fold((usize::MAX, f64::INFINITY), |acc, (i, &x)| if x < acc.1 { (i, x) } else { acc })
}

fn argmax(v: &[f64], keep: impl Fn(usize) -> bool) -> (usize, f64) {
    v.iter()
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .fold((usize::MAX, f64::NEG_INFINITY), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc })
}

/// `A^{(x) n}` with row-major multi-index order.
pub fn kronecker_power(a: &RMatrix, n: usize) -> Result<RMatrix> {
    kronecker_power_capped(a, n, KRONECKER_ROW_CAP)
}

pub fn kronecker_power_capped(a: &RMatrix, n: usize, cap: usize) -> Result<RMatrix> {
    if !a.is_square() || n == 0 {
        return Err(Error::Shape(format!("kronecker power {n} of {}x{}", a.nrows(), a.ncols())));
    }
    let rows = (a.nrows() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if rows > cap as u128 {
        return Err(Error::SizeCapExceeded {
            rows: rows.min(usize::MAX as u128) as usize,
            cap,
        });
    }
    let mut out = a.clone();
    for _ in 1..n {
        out = out.kronecker(a);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{absolute_overlap_matrix, trine_channel};
    use rand::Rng;

    fn trine_a() -> RMatrix {
        absolute_overlap_matrix(&trine_channel()).into_matrix()
    }

    /// Brute-force grid over the simplex at the given resolution.
    fn grid_min(a: &RMatrix, steps: usize) -> f64 {
        let k = a.nrows();
        let mut best = f64::INFINITY;
        let mut counts = vec![0usize; k];
        fn rec(a: &RMatrix, counts: &mut Vec<usize>, idx: usize, left: usize, steps: usize, best: &mut f64) {
            let k = counts.len();
            if idx == k - 1 {
                counts[idx] = left;
                let p: Vec<f64> = counts.iter().map(|&c| c as f64 / steps as f64).collect();
                *best = best.min(quad(a, &p));
                return;
            }
            for c in 0..=left {
                counts[idx] = c;
                rec(a, counts, idx + 1, left - c, steps, best);
            }
        }
        rec(a, &mut counts, 0, steps, steps, &mut best);
        best
    }

    #[test]
    fn quadratic_form_examples() {
        let q = quadratic_form(&trine_a(), &SimplexDistribution::uniform(3)).unwrap();
        assert!((q - 2.0 / 3.0).abs() < 1e-15);
        for d in 1..6 {
            let q = quadratic_form(&RMatrix::identity(d, d), &SimplexDistribution::uniform(d)).unwrap();
            assert!((q - 1.0 / d as f64).abs() < 1e-15);
        }
        let ones = RMatrix::from_element(3, 3, 1.0);
        let p = SimplexDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert!((quadratic_form(&ones, &p).unwrap() - 1.0).abs() < 1e-15);
        assert!(quadratic_form(&ones, &SimplexDistribution::uniform(2)).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(SimplexDistribution::new(vec![]).is_err());
        assert!(SimplexDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexDistribution::new(vec![-0.1, 1.1]).is_err());
        assert!(SimplexDistribution::new(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn trine_min_is_two_thirds_at_uniform() {
        let r = min_quadratic_over_simplex(&trine_a(), &SimplexOptions::default()).unwrap();
        assert_eq!(r.method, MinMethod::ExactEnumeration);
        assert!((r.value - 2.0 / 3.0).abs() < 1e-14);
        assert_eq!(r.support, vec![0, 1, 2]);
        assert!(r.minimizer.probs().iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-14));
    }

    #[test]
    fn identity_min_matches_grid() {
        for d in 1..=3 {
            let a = RMatrix::identity(d, d);
            let r = min_quadratic_over_simplex(&a, &SimplexOptions::default()).unwrap();
            assert!((r.value - 1.0 / d as f64).abs() < 1e-14);
            // grid resolution 1e-3 hits 1/d exactly only for d | 1000; compare loosely
            assert!((grid_min(&a, if d == 3 { 300 } else { 1000 }) - r.value).abs() < 1e-6);
        }
    }

    #[test]
    fn binary_min_closed_form() {
        for i in 0..=10 {
            let c = i as f64 / 10.0;
            let a = RMatrix::from_row_slice(2, 2, &[1.0, c, c, 1.0]);
            let r = min_quadratic_over_simplex(&a, &SimplexOptions::default()).unwrap();
            assert!((r.value - (1.0 + c) / 2.0).abs() < 1e-14, "c={c}");
            assert!((grid_min(&a, 1000) - r.value).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_matches_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let k = 3;
            let mut a = RMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
            a = crate::linalg::symmetrize(&a);
            let r = min_quadratic_over_simplex(&a, &SimplexOptions::default()).unwrap();
            let g = grid_min(&a, 200);
            assert!(r.value <= g + 1e-12);
            assert!(g - r.value < 5e-3);
            assert!((quadratic_form(&a, &r.minimizer).unwrap() - r.value).abs() < 1e-10);
        }
    }

    #[test]
    fn frank_wolfe_matches_exact_on_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let k = rng.random_range(2..=8);
            let b = RMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
            let a = b.transpose() * &b;
            let exact = min_quadratic_over_simplex(&a, &SimplexOptions::default()).unwrap();
            let fw_opts = SimplexOptions {
                exact_threshold: 0,
                ..SimplexOptions::default()
            };
            let fw = min_quadratic_over_simplex(&a, &fw_opts).unwrap();
            assert_eq!(fw.method, MinMethod::FrankWolfe);
            assert!((exact.value - fw.value).abs() < 1e-7, "{} vs {}", exact.value, fw.value);
        }
    }

    #[test]
    fn kronecker_examples() {
        let a = RMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
        assert_eq!(kronecker_power(&a, 1).unwrap(), a);
        assert_eq!(kronecker_power(&RMatrix::identity(2, 2), 3).unwrap(), RMatrix::identity(8, 8));
        let t2 = kronecker_power(&trine_a(), 2).unwrap();
        assert_eq!(t2.nrows(), 9);
        // (0,1) -> row 1, (1,0) -> column 3
        assert!((t2[(1, 3)] - 0.25).abs() < 1e-15);
        assert!(matches!(
            kronecker_power(&trine_a(), 8),
            Err(Error::SizeCapExceeded { rows: 6561, cap: 4096 })
        ));
    }

    #[test]
    fn serialized_distribution_roundtrip() {
        let p = SimplexDistribution::new(vec![0.1, 0.2, 0.7]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let q: SimplexDistribution = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        assert!(serde_json::from_str::<SimplexDistribution>("[0.5, 0.9]").is_err());
    }
}
