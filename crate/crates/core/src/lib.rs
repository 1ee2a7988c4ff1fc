// SPDX-License-Identifier: Apache-2.0

//! Zero-error list-decoding bounds for pure-state classical-quantum channels,
//! together with an executable list-2 code construction and measurement
//! verifier.
//!
//! All rates are in bits per channel use.

pub mod bounds;
pub mod channel;
pub mod code;
pub mod error;
pub mod factor;
pub mod io;
pub mod linalg;
pub mod povm;
pub mod rng;
pub mod serde_matrix;
pub mod simplex;

pub use bounds::{
    achievability_bound_l2, bounds_report, bounds_report_with, converse_bound, min_list_size_for_rate, r_infinity,
    BoundValue, BoundsReport, Certificate, ConverseOptions, DualityGapError, ReportOptions,
};
pub use channel::{
    absolute_overlap_matrix, binary_channel, codeword_abs_overlap, is_psd_absolute_overlaps, make_channel,
    orthonormal_channel, pairwise_non_obtuse_phases, trine_channel, ChannelSpec, NonObtuseResult, OverlapMatrix,
    PhaseAssignment,
};
pub use code::{build_list2_decoder, code_gram, empirical_rate, expurgate_code, Codebook, ExpurgationCertificate};
pub use error::{Error, Result};
pub use factor::{factor_diag_dominant, is_diagonally_dominant, is_factor_width_two, GramMatrix, SparseFactor};
pub use povm::{build_povm, dual_basis, simulate_decode, verify_povm, ListMeasurement, VerificationReport};
pub use simplex::{
    kronecker_power, min_quadratic_over_simplex, quadratic_form, SimplexDistribution, SimplexMinResult,
    SimplexOptions,
};
