// SPDX-License-Identifier: Apache-2.0

//! Achievability, converse and sphere-packing (`R_inf`) bounds on the
//! zero-error list-decoding capacity, in bits per channel use.

mod converse;
mod r_infinity;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{
    absolute_overlap_matrix, is_psd_absolute_overlaps, pairwise_non_obtuse_phases, ChannelSpec, DEFAULT_TOL,
};
use crate::error::{Error as CoreError, Result};
use crate::linalg::{CMatrix, RMatrix};
use crate::simplex::{min_quadratic_over_simplex, quadratic_form, SimplexDistribution, SimplexOptions};

pub use converse::{check_converse_matrix, ConverseFamily, ConverseOptions};
pub use r_infinity::{primal_value, rho, RInfinityMethod, RInfinityOptions, RInfinitySolution};

/// Agreement demanded between bounds that a structural condition forces equal.
pub const MATCHING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// Distribution attaining `min_P P^T A_W P`.
    Distribution {
        distribution: SimplexDistribution,
        q_value: f64,
    },
    /// Feasible converse matrix together with its inner minimizer.
    ConverseMatrix {
        #[serde(with = "crate::serde_matrix::real")]
        matrix: RMatrix,
        distribution: SimplexDistribution,
        q_value: f64,
        family: ConverseFamily,
        /// True when the absolute overlaps are PSD, where the certificate is optimal.
        optimal: bool,
        sign_patterns_exhaustive: bool,
    },
    /// Primal density matrix and dual distribution for `R_inf`.
    DensityPair {
        #[serde(with = "crate::serde_matrix::complex")]
        sigma: CMatrix,
        distribution: SimplexDistribution,
        lambda_max: f64,
        primal_value: f64,
        duality_gap_bits: f64,
        gap_closed: bool,
        method: RInfinityMethod,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub bits: f64,
    pub certificate: Certificate,
}

impl BoundValue {
    /// Recomputes the bound from its certificate alone.
    pub fn reevaluate(&self, ch: &ChannelSpec) -> Result<f64> {
        let q = match &self.certificate {
            Certificate::Distribution { distribution, .. } => {
                quadratic_form(absolute_overlap_matrix(ch).matrix(), distribution)?
            }
            Certificate::ConverseMatrix {
                matrix, distribution, ..
            } => {
                check_converse_matrix(ch, matrix)?;
                quadratic_form(matrix, distribution)?
            }
            Certificate::DensityPair { distribution, .. } => {
                let r = rho(ch, distribution.probs());
                crate::linalg::hermitian_max_eigenvalue(&r)
            }
        };
        Ok(bits_from_probability(q))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub achievability_l2: BoundValue,
    pub converse: BoundValue,
    pub r_infinity: BoundValue,
    pub psd_abs_overlaps: bool,
    pub pairwise_non_obtuse: bool,
    pub capacity_exact: Option<f64>,
    pub notes: String,
}

impl BoundsReport {
    pub fn r_infinity_gap_closed(&self) -> bool {
        matches!(self.r_infinity.certificate, Certificate::DensityPair { gap_closed: true, .. })
    }
}

/// `R_inf` solve whose duality gap stayed above the requested tolerance.
#[derive(Debug, Clone, Error)]
#[error("R_inf duality gap {gap:e} bits exceeds tolerance {tol:e}")]
pub struct DualityGapError {
    pub gap: f64,
    pub tol: f64,
    pub partial: BoundValue,
}

fn bits_from_probability(q: f64) -> f64 {
    if q <= 0.0 {
        f64::INFINITY
    } else {
        (-q.log2()).max(0.0)
    }
}

pub fn achievability_bound_l2(ch: &ChannelSpec) -> BoundValue {
    let a = absolute_overlap_matrix(ch).into_matrix();
    let r = min_quadratic_over_simplex(&a, &SimplexOptions::default())
        .expect("absolute overlap matrix is square and nonempty");
    BoundValue {
        bits: bits_from_probability(r.value),
        certificate: Certificate::Distribution {
            distribution: r.minimizer,
            q_value: r.value,
        },
    }
}

pub fn converse_bound(ch: &ChannelSpec, opts: &ConverseOptions) -> BoundValue {
    let (candidates, exhaustive) = converse::candidates(ch, opts);
    let optimal = candidates
        .first()
        .is_some_and(|c| c.family == ConverseFamily::AbsoluteOverlaps);
    let mut best: Option<(f64, SimplexDistribution, RMatrix, ConverseFamily)> = None;
    for c in candidates {
        if check_converse_matrix(ch, &c.matrix).is_err() {
            continue;
        }
        let r = min_quadratic_over_simplex(&c.matrix, &SimplexOptions::default())
            .expect("candidate matrices are square");
        if best.as_ref().is_none_or(|b| r.value > b.0) {
            best = Some((r.value, r.minimizer, c.matrix, c.family));
        }
    }
    let (q, distribution, matrix, family) = best.expect("the identity is always feasible");
    BoundValue {
        bits: bits_from_probability(q),
        certificate: Certificate::ConverseMatrix {
            matrix,
            distribution,
            q_value: q,
            family,
            optimal,
            sign_patterns_exhaustive: exhaustive,
        },
    }
}

pub fn r_infinity(ch: &ChannelSpec, tol: f64) -> std::result::Result<BoundValue, DualityGapError> {
    r_infinity_with(
        ch,
        &RInfinityOptions {
            tol,
            ..RInfinityOptions::default()
        },
    )
}

pub fn r_infinity_with(ch: &ChannelSpec, opts: &RInfinityOptions) -> std::result::Result<BoundValue, DualityGapError> {
    let sol = r_infinity::solve(ch, opts);
    let gap_closed = sol.gap_bits <= opts.tol;
    let bound = BoundValue {
        bits: sol.bits(),
        certificate: Certificate::DensityPair {
            sigma: sol.sigma,
            distribution: sol.distribution,
            lambda_max: sol.lambda_max,
            primal_value: sol.primal_value,
            duality_gap_bits: sol.gap_bits,
            gap_closed,
            method: sol.method,
        },
    };
    if gap_closed {
        Ok(bound)
    } else {
        Err(DualityGapError {
            gap: sol.gap_bits,
            tol: opts.tol,
            partial: bound,
        })
    }
}

/// Smallest list size compatible with `2^(n rate)` codewords under the
/// converse matrix `a`: `ceil(2^(n rate) (min_P P^T A P)^n)`.
pub fn min_list_size_for_rate(ch: &ChannelSpec, a: &RMatrix, rate: f64, n: usize) -> Result<u64> {
    check_converse_matrix(ch, a)?;
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(CoreError::Shape(format!("rate {rate} must be finite and nonnegative")));
    }
    if n == 0 {
        return Err(CoreError::Shape("block length must be positive".into()));
    }
    let q = min_quadratic_over_simplex(a, &SimplexOptions::default())?.value;
    if q <= 0.0 {
        return Ok(1);
    }
    let log2_list = n as f64 * (rate + q.log2());
    if log2_list >= 63.0 {
        return Err(CoreError::ListSizeOverflow(log2_list));
    }
    // shave a few ulps so exact integers are not pushed up by rounding noise
    let value = log2_list.exp2() * (1.0 - 1e-12);
    Ok((value.ceil() as u64).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReportOptions {
    pub converse: ConverseOptions,
    pub r_infinity: RInfinityOptions,
}

pub fn bounds_report(ch: &ChannelSpec) -> BoundsReport {
    bounds_report_with(ch, &ReportOptions::default())
}

pub fn bounds_report_with(ch: &ChannelSpec, opts: &ReportOptions) -> BoundsReport {
    let achievability = achievability_bound_l2(ch);
    let converse = converse_bound(ch, &opts.converse);
    let (r_inf, gap_note) = match r_infinity_with(ch, &opts.r_infinity) {
        Ok(b) => (b, None),
        Err(e) => {
            let note = format!("R_inf duality gap {:.3e} bits not closed (tolerance {:.1e})", e.gap, e.tol);
            (e.partial, Some(note))
        }
    };
    let psd = is_psd_absolute_overlaps(ch, DEFAULT_TOL);
    let non_obtuse = pairwise_non_obtuse_phases(ch, DEFAULT_TOL).is_aligned();

    let mut notes = Vec::new();
    let mut capacity_exact = None;
    if psd {
        capacity_exact = Some(achievability.bits);
        notes.push("PSD absolute overlaps: achievability and converse coincide".to_string());
        if (achievability.bits - converse.bits).abs() > MATCHING_TOL {
            notes.push(format!(
                "WARNING: achievability {} and converse {} differ despite PSD overlaps",
                achievability.bits, converse.bits
            ));
        }
    }
    if non_obtuse {
        capacity_exact = Some(achievability.bits);
        if (achievability.bits - r_inf.bits).abs() <= MATCHING_TOL {
            notes.push("pairwise non-obtuse: capacity equals R_inf".to_string());
        } else {
            notes.push(format!(
                "WARNING: pairwise non-obtuse but achievability {} differs from R_inf {}",
                achievability.bits, r_inf.bits
            ));
        }
    } else if let Some(c) = capacity_exact {
        let gap = r_inf.bits - c;
        if gap > MATCHING_TOL {
            notes.push(format!("strict gap to R_inf: {gap:.12}"));
        }
    }
    if !psd && !non_obtuse {
        notes.push("no matching condition: capacity bracketed by achievability and converse".to_string());
    }
    notes.extend(gap_note);

    BoundsReport {
        achievability_l2: achievability,
        converse,
        r_infinity: r_inf,
        psd_abs_overlaps: psd,
        pairwise_non_obtuse: non_obtuse,
        capacity_exact,
        notes: notes.join("; "),
    }
}
