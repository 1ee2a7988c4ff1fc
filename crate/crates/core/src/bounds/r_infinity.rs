// SPDX-License-Identifier: Apache-2.0

//! The sphere-packing divergence rate for pure-state channels,
//!
//! ```text
//! R_inf = -log2 max_sigma min_x <psi_x|sigma|psi_x> = -log2 min_P lambda_max(rho_P),
//! ```
//!
//! with `rho_P = sum_x P(x) |psi_x><psi_x|`. Every solver returns both a
//! density matrix `sigma` (primal) and a distribution `P` (dual); the reported
//! gap `log2(lambda_max(rho_P) / min_x <psi_x|sigma|psi_x>)` is nonnegative by
//! weak duality and bounds the error of the reported value.
//!
//! The default solver follows the log-barrier central path of the primal
//! semidefinite program with Newton steps. Interior iterates lose `O(1/tau)`
//! in the primal value and recover `P` only through `1/s_x`, so each iterate is
//! refined by Gauss-Newton on the optimality conditions before certification.
//! Projected subgradient descent on `lambda_max(rho_P)` is kept as an
//! independent route.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSpec;
use crate::linalg::{hermitian_eigh, hermitize, CMatrix, CVector, RMatrix, ONE};
use crate::simplex::SimplexDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RInfinityMethod {
    /// Log-barrier path following on the primal semidefinite program.
    Barrier,
    /// Projected subgradient descent on `lambda_max(rho_P)` with Polyak steps.
    Subgradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RInfinityOptions {
    /// Largest acceptable duality gap, in bits.
    pub tol: f64,
    pub method: RInfinityMethod,
    /// Iteration budget of the subgradient method.
    pub max_iter: usize,
}

impl Default for RInfinityOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            method: RInfinityMethod::Barrier,
            max_iter: 50_000,
        }
    }
}

/// Primal/dual pair produced by a solver.
#[derive(Debug, Clone)]
pub struct RInfinitySolution {
    pub sigma: CMatrix,
    pub distribution: SimplexDistribution,
    pub lambda_max: f64,
    pub primal_value: f64,
    pub gap_bits: f64,
    pub method: RInfinityMethod,
}

impl RInfinitySolution {
    /// The dual estimate `-log2 lambda_max(rho_P)`, a lower bound on the rate.
    pub fn bits(&self) -> f64 {
        (-self.lambda_max.log2()).max(0.0)
    }
}

pub fn rho(ch: &ChannelSpec, p: &[f64]) -> CMatrix {
    let d = ch.dim();
    let mut r = CMatrix::zeros(d, d);
    for (state, &w) in ch.states().iter().zip(p) {
        if w != 0.0 {
            r += state * state.adjoint() * Complex64::new(w, 0.0);
        }
    }
    hermitize(&r)
}

/// `min_x <psi_x|sigma|psi_x>`.
pub fn primal_value(ch: &ChannelSpec, sigma: &CMatrix) -> f64 {
    ch.states()
        .iter()
        .map(|s| (s.adjoint() * sigma * s)[(0, 0)].re)
        .fold(f64::INFINITY, f64::min)
}

fn finish(ch: &ChannelSpec, sigma: CMatrix, p: Vec<f64>, method: RInfinityMethod) -> RInfinitySolution {
    let sigma = normalize_density(&sigma);
    let distribution = SimplexDistribution::from_weights(&p).expect("nonnegative weights");
    let (vals, _) = hermitian_eigh(&rho(ch, distribution.probs()));
    let lambda_max = *vals.last().expect("dim >= 1");
    let primal = primal_value(ch, &sigma);
    let gap_bits = if primal > 0.0 {
        (lambda_max / primal).log2().max(0.0)
    } else {
        f64::INFINITY
    };
    RInfinitySolution {
        sigma,
        distribution,
        lambda_max,
        primal_value: primal,
        gap_bits,
        method,
    }
}

/// Hermitian, PSD, trace one.
fn normalize_density(s: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigh(s);
    let clipped: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let d = s.nrows();
    let mut out = CMatrix::zeros(d, d);
    for (k, &v) in clipped.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(k);
            out += col * col.adjoint() * Complex64::new(v / total, 0.0);
        }
    }
    hermitize(&out)
}

pub fn solve(ch: &ChannelSpec, opts: &RInfinityOptions) -> RInfinitySolution {
    match opts.method {
        RInfinityMethod::Barrier => barrier(ch),
        RInfinityMethod::Subgradient => subgradient(ch, opts.max_iter, opts.tol),
    }
}

/// Orthonormal (trace inner product) basis of the d x d Hermitian matrices.
fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(d * d);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..d {
        let mut e = CMatrix::zeros(d, d);
        e[(k, k)] = ONE;
        basis.push(e);
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut re = CMatrix::zeros(d, d);
            re[(j, k)] = Complex64::new(h, 0.0);
            re[(k, j)] = Complex64::new(h, 0.0);
            basis.push(re);
            let mut im = CMatrix::zeros(d, d);
            im[(j, k)] = Complex64::new(0.0, h);
            im[(k, j)] = Complex64::new(0.0, -h);
            basis.push(im);
        }
    }
    basis
}

struct BarrierProblem {
    basis: Vec<CMatrix>,
    /// `c[x][a] = <psi_x|E_a|psi_x>`.
    coeffs: Vec<Vec<f64>>,
    trace_row: Vec<f64>,
}

impl BarrierProblem {
    fn new(ch: &ChannelSpec) -> Self {
        let d = ch.dim();
        let basis = hermitian_basis(d);
        let coeffs = ch
            .states()
            .iter()
            .map(|s| basis.iter().map(|e| (s.adjoint() * e * s)[(0, 0)].re).collect())
            .collect();
        let trace_row = basis.iter().map(|e| e.trace().re).collect();
        Self {
            basis,
            coeffs,
            trace_row,
        }
    }

    fn sigma(&self, y: &[f64]) -> CMatrix {
        let d = self.basis[0].nrows();
        let mut s = CMatrix::zeros(d, d);
        for (e, &w) in self.basis.iter().zip(y) {
            s += e * Complex64::new(w, 0.0);
        }
        s
    }

    fn slacks(&self, y: &[f64], t: f64) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - t)
            .collect()
    }

    /// Barrier objective `-tau t - sum log s_x - log det sigma`, or `None`
    /// outside the domain.
    fn value(&self, y: &[f64], t: f64, tau: f64) -> Option<f64> {
        let s = self.slacks(y, t);
        if s.iter().any(|v| !(*v > 0.0)) {
            return None;
        }
        let chol = Cholesky::new(self.sigma(y))?;
        let logdet: f64 = chol.l().diagonal().iter().map(|z| 2.0 * z.re.ln()).sum();
        Some(-tau * t - s.iter().map(|v| v.ln()).sum::<f64>() - logdet)
    }
}

fn barrier(ch: &ChannelSpec) -> RInfinitySolution {
    let d = ch.dim();
    let k = ch.alphabet_size();
    let prob = BarrierProblem::new(ch);
    let nv = d * d;
    let mut y = vec![0.0; nv];
    for v in y.iter_mut().take(d) {
        *v = 1.0 / d as f64;
    }
    let mut t = prob.slacks(&y, 0.0).iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let m = (k + d) as f64;
    let mut tau = 1.0;
    let mut best: Option<RInfinitySolution> = None;

    loop {
        for _ in 0..100 {
            let Some(f0) = prob.value(&y, t, tau) else { break };
            let s = prob.slacks(&y, t);
            let sigma = prob.sigma(&y);
            let Some(sigma_inv) = sigma.clone().try_inverse() else { break };
            let sigma_inv = hermitize(&sigma_inv);
            let w: Vec<CMatrix> = prob.basis.iter().map(|e| &sigma_inv * e).collect();

            let n = nv + 1;
            let mut hess = RMatrix::zeros(n, n);
            let mut grad = DVector::<f64>::zeros(n);
            for a in 0..nv {
                grad[a] = -w[a].trace().re;
                for b in a..nv {
                    let v = (&w[a] * &w[b]).trace().re;
                    hess[(a, b)] += v;
                    if a != b {
                        hess[(b, a)] += v;
                    }
                }
            }
            grad[nv] = -tau;
            for (c, &sx) in prob.coeffs.iter().zip(&s) {
                let inv = 1.0 / sx;
                let inv2 = inv * inv;
                for a in 0..nv {
                    grad[a] -= c[a] * inv;
                    for b in 0..nv {
                        hess[(a, b)] += c[a] * c[b] * inv2;
                    }
                    hess[(a, nv)] -= c[a] * inv2;
                    hess[(nv, a)] -= c[a] * inv2;
                }
                grad[nv] += inv;
                hess[(nv, nv)] += inv2;
            }

            // Newton step under the trace constraint
            let mut kkt = DMatrix::<f64>::zeros(n + 1, n + 1);
            kkt.view_mut((0, 0), (n, n)).copy_from(&hess);
            for a in 0..nv {
                kkt[(a, n)] = prob.trace_row[a];
                kkt[(n, a)] = prob.trace_row[a];
            }
            let mut rhs = DVector::<f64>::zeros(n + 1);
            rhs.rows_mut(0, n).copy_from(&(-&grad));
            let Some(sol) = kkt.full_piv_lu().solve(&rhs) else { break };
            let step = sol.rows(0, n).into_owned();
            let decrement = -grad.dot(&step);
            if !decrement.is_finite() || decrement / 2.0 <= 1e-12 {
                break;
            }
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha > 1e-14 {
                let y1: Vec<f64> = (0..nv).map(|a| y[a] + alpha * step[a]).collect();
                let t1 = t + alpha * step[nv];
                if let Some(f1) = prob.value(&y1, t1, tau) {
                    if f1 <= f0 - 0.25 * alpha * decrement {
                        y = y1;
                        t = t1;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }

        let s = prob.slacks(&y, t);
        let p: Vec<f64> = s.iter().map(|v| 1.0 / v).collect();
        let candidate = finish(ch, prob.sigma(&y), p, RInfinityMethod::Barrier);
        let polished = polish(ch, &candidate);
        for c in [candidate, polished] {
            if best.as_ref().is_none_or(|b| c.gap_bits < b.gap_bits) {
                best = Some(c);
            }
        }
        let closed = best.as_ref().is_some_and(|b| b.gap_bits <= 1e-14);
        if closed || m / tau < 1e-13 {
            break;
        }
        tau *= 8.0;
    }
    best.expect("at least one outer iteration")
}

/// Refines a near-optimal pair by Gauss-Newton on the optimality conditions.
///
/// With `sigma = W W^dagger` (`W` is `d x r`) and `P` supported on `S`, an
/// optimal pair satisfies `(lambda 1 - rho_P) W = 0`, `|W^dagger psi_x|^2 =
/// lambda` on `S`, `sum P = 1` and `Tr sigma = 1`. The rank `r` and support `S`
/// are read off the current iterate at several thresholds; every refined pair
/// is re-certified by [`finish`] and only kept if its gap is smaller.
fn polish(ch: &ChannelSpec, sol: &RInfinitySolution) -> RInfinitySolution {
    let p = sol.distribution.probs();
    let (vals, vecs) = hermitian_eigh(&rho(ch, p));
    let lam = *vals.last().expect("dim >= 1");
    let pmax = p.iter().copied().fold(0.0, f64::max);
    let (svals, svecs) = hermitian_eigh(&sol.sigma);

    let mut ranks: Vec<usize> = [1e-2, 1e-4, 1e-6, 1e-8]
        .iter()
        .map(|w| vals.iter().filter(|&&v| v >= lam * (1.0 - w)).count())
        .collect();
    ranks.dedup();
    let mut supports: Vec<Vec<usize>> = [1e-2, 1e-4, 1e-6]
        .iter()
        .map(|thr| (0..p.len()).filter(|&x| p[x] >= thr * pmax).collect())
        .collect();
    supports.dedup();

    let mut best = sol.clone();
    for &r in &ranks {
        // start from sigma compressed to the top-r eigenspace of rho_P
        let d = vals.len();
        let u = CMatrix::from_fn(d, r, |i, c| vecs[(i, d - r + c)]);
        let z = u.adjoint() * &sol.sigma * &u;
        let (zv, zvec) = hermitian_eigh(&z);
        let mut w = &u * zvec * CMatrix::from_diagonal(&DVector::from_iterator(r, zv.iter().map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0))));
        if w.norm_squared() <= 0.0 {
            // fall back to the leading eigenvectors of sigma itself
            w = CMatrix::from_fn(d, r, |i, c| svecs[(i, d - r + c)] * svals[d - r + c].max(0.0).sqrt());
        }
        for support in &supports {
            let Some((w1, p1)) = gauss_newton(ch, &w, p, lam, support) else { continue };
            let c = finish(ch, &w1 * w1.adjoint(), p1, sol.method);
            if c.gap_bits < best.gap_bits {
                best = c;
            }
        }
    }
    best
}

struct Kkt<'a> {
    states: &'a [CVector],
    support: &'a [usize],
    d: usize,
    r: usize,
}

impl Kkt<'_> {
    fn unpack(&self, z: &[f64]) -> (CMatrix, Vec<f64>, f64) {
        let (d, r) = (self.d, self.r);
        let w = CMatrix::from_fn(d, r, |i, c| Complex64::new(z[i * r + c], z[d * r + i * r + c]));
        let p = z[2 * d * r..2 * d * r + self.support.len()].to_vec();
        (w, p, z[z.len() - 1])
    }

    fn residual(&self, z: &[f64]) -> DVector<f64> {
        let (w, p, lam) = self.unpack(z);
        let (d, r) = (self.d, self.r);
        let mut rho = CMatrix::zeros(d, d);
        for (&x, &px) in self.support.iter().zip(&p) {
            let s = &self.states[x];
            rho += s * s.adjoint() * Complex64::new(px, 0.0);
        }
        let e1 = &w * Complex64::new(lam, 0.0) - rho * &w;
        let mut out = Vec::with_capacity(2 * d * r + self.support.len() + 2);
        out.extend(e1.iter().map(|z| z.re));
        out.extend(e1.iter().map(|z| z.im));
        for &x in self.support {
            out.push((w.adjoint() * &self.states[x]).norm_squared() - lam);
        }
        out.push(p.iter().sum::<f64>() - 1.0);
        out.push(w.norm_squared() - 1.0);
        DVector::from_vec(out)
    }
}

fn gauss_newton(
    ch: &ChannelSpec,
    w0: &CMatrix,
    p0: &[f64],
    lam0: f64,
    support: &[usize],
) -> Option<(CMatrix, Vec<f64>)> {
    let (d, r) = (w0.nrows(), w0.ncols());
    let kkt = Kkt {
        states: ch.states(),
        support,
        d,
        r,
    };
    let scale = w0.norm();
    if !(scale > 0.0) || support.is_empty() {
        return None;
    }
    let mut z: Vec<f64> = Vec::with_capacity(2 * d * r + support.len() + 1);
    z.extend((0..d).flat_map(|i| (0..r).map(move |c| (i, c))).map(|(i, c)| w0[(i, c)].re / scale));
    z.extend((0..d).flat_map(|i| (0..r).map(move |c| (i, c))).map(|(i, c)| w0[(i, c)].im / scale));
    let total: f64 = support.iter().map(|&x| p0[x]).sum();
    z.extend(support.iter().map(|&x| p0[x] / total));
    z.push(lam0);

    let mut res = kkt.residual(&z);
    for _ in 0..20 {
        if res.norm() < 1e-15 {
            break;
        }
        let h = 1e-7;
        let mut jac = DMatrix::<f64>::zeros(res.len(), z.len());
        for k in 0..z.len() {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += h;
            zm[k] -= h;
            jac.set_column(k, &((kkt.residual(&zp) - kkt.residual(&zm)) / (2.0 * h)));
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd.solve(&(-&res), 1e-10 * smax).ok()?;
        let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        let trial_res = kkt.residual(&trial);
        if !(trial_res.norm() < res.norm()) {
            break;
        }
        z = trial;
        res = trial_res;
    }
    let (w, ps, _) = kkt.unpack(&z);
    let mut p = vec![0.0; ch.alphabet_size()];
    for (&x, &px) in support.iter().zip(&ps) {
        p[x] = px.max(0.0);
    }
    p.iter().any(|&v| v > 0.0).then_some((w, p))
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumulative += ui;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if ui - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn top_eigenspace_density(r: &CMatrix, window: f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigh(r);
    let top = *vals.last().expect("nonempty");
    let d = r.nrows();
    let mut s = CMatrix::zeros(d, d);
    for (k, &v) in vals.iter().enumerate() {
        if v >= top - window {
            let col = vecs.column(k);
            s += col * col.adjoint();
        }
    }
    s
}

fn subgradient(ch: &ChannelSpec, max_iter: usize, tol: f64) -> RInfinitySolution {
    let k = ch.alphabet_size();
    let d = ch.dim();
    let mut p = vec![1.0 / k as f64; k];
    let mut best_p = p.clone();
    let mut best_f = f64::INFINITY;
    let mut best_sigma = CMatrix::identity(d, d).map(|z| z / d as f64);
    let mut lower = primal_value(ch, &best_sigma);
    let mut avg = CMatrix::zeros(d, d);
    let mut avg_weight = 0.0;
    // target-level Polyak: aim at max(lower, best_f - delta), halving delta
    // whenever a stretch of iterations fails to make half of it in progress
    let mut delta = f64::NAN;
    let mut reference = f64::INFINITY;
    let mut stalled = 0;

    for iter in 0..max_iter.max(1) {
        let r = rho(ch, &p);
        let (vals, vecs) = hermitian_eigh(&r);
        let f = *vals.last().expect("nonempty");
        let v = vecs.column(d - 1).into_owned();
        if f < best_f {
            best_f = f;
            best_p = p.clone();
        }
        if delta.is_nan() {
            delta = 0.5 * (best_f - lower).max(1e-12);
            reference = best_f;
        }
        if best_f <= reference - 0.5 * delta {
            reference = best_f;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 50 {
                delta *= 0.5;
                reference = best_f;
                stalled = 0;
            }
        }
        let outer = &v * v.adjoint();
        avg += &outer;
        avg_weight += 1.0;

        if iter % 10 == 0 {
            let window = 1e-6 * f.max(1e-300);
            let candidates = [top_eigenspace_density(&r, window), avg.map(|z| z / avg_weight)];
            for c in candidates {
                let c = normalize_density(&c);
                let val = primal_value(ch, &c);
                if val > lower {
                    lower = val;
                    best_sigma = c;
                }
            }
            if lower > 0.0 && (best_f / lower).log2() <= tol {
                break;
            }
        }

        let g: Vec<f64> = ch
            .states()
            .iter()
            .map(|s| (v.adjoint() * s)[(0, 0)].norm_sqr())
            .collect();
        let mean = g.iter().sum::<f64>() / k as f64;
        let norm2: f64 = g.iter().map(|x| (x - mean).powi(2)).sum();
        if norm2 <= 1e-30 {
            // zero projected subgradient: P is optimal
            let sigma = top_eigenspace_density(&r, 1e-9);
            let sigma = normalize_density(&sigma);
            if primal_value(ch, &sigma) > lower {
                best_sigma = sigma;
            }
            break;
        }
        let level = lower.max(best_f - delta);
        let step = (f - level).max(0.0) / norm2;
        let moved: Vec<f64> = p.iter().zip(&g).map(|(pi, gi)| pi - step * (gi - mean)).collect();
        p = project_simplex(&moved);
    }
    let sol = finish(ch, best_sigma, best_p, RInfinityMethod::Subgradient);
    if sol.gap_bits <= tol {
        sol
    } else {
        polish(ch, &sol)
    }
}
