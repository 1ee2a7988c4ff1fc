// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use cqzl_core::bounds::{ReportOptions, RInfinityOptions};
use cqzl_core::channel::{abs_overlap_min_eigenvalue, ObstructionWitness};
use cqzl_core::code::{min_block_length, target_code_size, TRIVIAL_TOL};
use cqzl_core::io::{channel_hash, from_json, parse_channel, CodebookFile};
use cqzl_core::{
    absolute_overlap_matrix, achievability_bound_l2, bounds_report_with, build_povm, code_gram, empirical_rate,
    expurgate_code, is_psd_absolute_overlaps, pairwise_non_obtuse_phases, verify_povm, Certificate, ChannelSpec,
    ConverseOptions, ListMeasurement, NonObtuseResult, VerificationReport,
};
use serde::{Deserialize, Serialize};

use crate::args::{AnalyzeArgs, BoundsArgs, ConstructArgs, Format, VerifyArgs};
use crate::output::{emit, emit_json, json_only, read_file, CliError, CliResult, Status};
use crate::sweep::{report_row, to_report_csv};

pub fn load_channel(path: &Path) -> CliResult<ChannelSpec> {
    parse_channel(&read_file(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

#[derive(Debug, Serialize)]
struct ChannelReport {
    dim: usize,
    alphabet_size: usize,
    channel_hash: String,
    abs_overlaps: Vec<Vec<f64>>,
    psd_abs_overlaps: bool,
    abs_overlap_min_eigenvalue: f64,
    pairwise_non_obtuse: bool,
    /// Unit phases `alpha_x` making every overlap real and nonnegative.
    phases: Option<Vec<[f64; 2]>>,
    witness: Option<ObstructionWitness>,
}

pub fn analyze(args: &AnalyzeArgs) -> CliResult<Status> {
    json_only(&args.output, "analyze")?;
    let ch = load_channel(&args.channel)?;
    let a = absolute_overlap_matrix(&ch);
    let (phases, witness) = match pairwise_non_obtuse_phases(&ch, args.tol) {
        NonObtuseResult::Aligned(p) => (Some(p.phases().iter().map(|z| [z.re, z.im]).collect()), None),
        NonObtuseResult::Obstructed(w) => (None, Some(w)),
    };
    let report = ChannelReport {
        dim: ch.dim(),
        alphabet_size: ch.alphabet_size(),
        channel_hash: channel_hash(&ch),
        abs_overlaps: a.matrix().row_iter().map(|r| r.iter().copied().collect()).collect(),
        psd_abs_overlaps: is_psd_absolute_overlaps(&ch, args.tol),
        abs_overlap_min_eigenvalue: abs_overlap_min_eigenvalue(&ch),
        pairwise_non_obtuse: phases.is_some(),
        phases,
        witness,
    };
    emit_json(&args.output, &report)?;
    Ok(Status::Ok)
}

pub fn bounds(args: &BoundsArgs) -> CliResult<Status> {
    let ch = load_channel(&args.channel)?;
    if !(args.tol > 0.0) {
        return Err(CliError::input("--tol must be positive"));
    }
    let opts = ReportOptions {
        converse: ConverseOptions {
            seed: args.seed,
            ..Default::default()
        },
        r_infinity: RInfinityOptions {
            tol: args.tol,
            ..Default::default()
        },
    };
    let report = bounds_report_with(&ch, &opts);
    match args.output.format.unwrap_or(Format::Json) {
        Format::Json => emit_json(&args.output, &report)?,
        Format::Csv => emit(&args.output, &to_report_csv("channel", &[report_row("channel", 0, None, &ch, &report)])?)?,
    }
    if report.r_infinity_gap_closed() {
        Ok(Status::Ok)
    } else {
        eprintln!("error: R_inf duality gap not closed; partial report written");
        Ok(Status::CertificateFailed)
    }
}

/// Everything `construct` produces; `verify` reads it back.
#[derive(Debug, Serialize, Deserialize)]
pub struct Bundle {
    pub codebook: CodebookFile,
    pub code_size: usize,
    pub list_size: usize,
    /// `log2(M / L) / n`.
    pub rate: f64,
    pub achievability_bits: f64,
    pub measurement: ListMeasurement,
    pub verification: VerificationReport,
}

pub fn construct(args: &ConstructArgs) -> CliResult<Status> {
    json_only(&args.output, "construct")?;
    if args.list_size == 0 {
        return Err(CliError::input("--list-size must be positive"));
    }
    if args.n == 0 {
        return Err(CliError::input("--n must be positive"));
    }
    let ch = load_channel(&args.channel)?;
    let failed = |e: &dyn std::fmt::Display| CliError::new(Status::ConstructionFailed, e);

    let achievability = achievability_bound_l2(&ch);
    let Certificate::Distribution { distribution, q_value } = &achievability.certificate else {
        unreachable!("achievability certificates are distributions");
    };
    if *q_value >= 1.0 - TRIVIAL_TOL {
        return Err(failed(&"channel is trivial (Q_P = 1): no zero-error code of positive rate"));
    }
    match target_code_size(*q_value, args.n) {
        Some(m) if m >= 2 => {}
        Some(_) => {
            let need = min_block_length(*q_value, 2).map_or_else(|| "unbounded".to_string(), |n| n.to_string());
            return Err(failed(&format!("n too small, need n >= {need}")));
        }
        None => return Err(failed(&format!("code size for n = {} overflows", args.n))),
    }
    let (code, cert) = expurgate_code(&ch, distribution, args.n, args.seed).map_err(|e| failed(&e))?;
    let g = code_gram(&ch, &code).map_err(|e| failed(&e))?;
    let measurement = build_povm(&g).map_err(|e| failed(&e))?;
    let verification = verify_povm(&measurement, &g, args.list_size).map_err(|e| failed(&e))?;
    let status = if verification.passes(args.list_size) {
        Status::Ok
    } else {
        Status::VerificationFailed
    };
    let bundle = Bundle {
        codebook: CodebookFile::new(&code, distribution, &cert),
        code_size: code.size(),
        list_size: args.list_size,
        rate: empirical_rate(&code, 2),
        achievability_bits: achievability.bits,
        measurement: if args.rank_one { measurement } else { measurement.to_dense() },
        verification,
    };
    emit_json(&args.output, &bundle)?;
    Ok(status)
}

pub fn verify(args: &VerifyArgs) -> CliResult<Status> {
    json_only(&args.output, "verify")?;
    if args.list_size == 0 {
        return Err(CliError::input("--list-size must be positive"));
    }
    let ch = load_channel(&args.channel)?;
    let bundle: Bundle = from_json(&read_file(&args.bundle)?)
        .map_err(|e| CliError::input(format!("{}: {e}", args.bundle.display())))?;
    let code = bundle.codebook.codebook();
    code.check_channel(&ch).map_err(CliError::input)?;
    let g = code_gram(&ch, &code).map_err(CliError::input)?;
    let report = verify_povm(&bundle.measurement, &g, args.list_size)
        .map_err(|e| CliError::new(Status::VerificationFailed, format!("measurement rejected: {e}")))?;
    emit_json(&args.output, &report)?;
    Ok(if report.passes(args.list_size) {
        Status::Ok
    } else {
        Status::VerificationFailed
    })
}
