// SPDX-License-Identifier: Apache-2.0

//! Parameter sweeps. Rows are computed in parallel and emitted in index
//! order; the `random` family draws channel `i` from the ChaCha8 stream `i`
//! of `--seed`, so each row is independent of the others and of scheduling.

use cqzl_core::bounds::{ReportOptions, RInfinityOptions};
use cqzl_core::channel::{binary_channel, random_channel, trine_channel};
use cqzl_core::rng::stream;
use cqzl_core::{absolute_overlap_matrix, bounds_report_with, min_list_size_for_rate, BoundsReport, ChannelSpec};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Family, Format, SweepArgs};
use crate::output::{csv_float, csv_option, emit, emit_json, to_csv, CliError, CliResult, Status};

/// One channel's bounds, flattened for tabular output.
#[derive(Debug, Serialize)]
pub struct ReportRow {
    pub family: String,
    pub index: usize,
    pub param: Option<f64>,
    pub alphabet: usize,
    pub dim: usize,
    pub achievability_l2: f64,
    pub converse: f64,
    pub r_infinity: f64,
    pub r_infinity_gap_closed: bool,
    pub psd_abs_overlaps: bool,
    pub pairwise_non_obtuse: bool,
    pub capacity_exact: Option<f64>,
    /// `achievability <= min(converse, r_infinity) + 1e-7`.
    pub sandwich_ok: bool,
}

const REPORT_HEADER: [&str; 13] = [
    "family",
    "index",
    "param",
    "alphabet",
    "dim",
    "achievability_l2",
    "converse",
    "r_infinity",
    "r_infinity_gap_closed",
    "psd_abs_overlaps",
    "pairwise_non_obtuse",
    "capacity_exact",
    "sandwich_ok",
];

pub fn report_row(family: &str, index: usize, param: Option<f64>, ch: &ChannelSpec, r: &BoundsReport) -> ReportRow {
    let a = r.achievability_l2.bits;
    ReportRow {
        family: family.to_string(),
        index,
        param,
        alphabet: ch.alphabet_size(),
        dim: ch.dim(),
        achievability_l2: a,
        converse: r.converse.bits,
        r_infinity: r.r_infinity.bits,
        r_infinity_gap_closed: r.r_infinity_gap_closed(),
        psd_abs_overlaps: r.psd_abs_overlaps,
        pairwise_non_obtuse: r.pairwise_non_obtuse,
        capacity_exact: r.capacity_exact,
        sandwich_ok: a <= r.converse.bits.min(r.r_infinity.bits) + 1e-7,
    }
}

pub fn to_report_csv(family: &str, rows: &[ReportRow]) -> CliResult<String> {
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.family.clone(),
                r.index.to_string(),
                csv_option(r.param),
                r.alphabet.to_string(),
                r.dim.to_string(),
                csv_float(r.achievability_l2),
                csv_float(r.converse),
                csv_float(r.r_infinity),
                r.r_infinity_gap_closed.to_string(),
                r.psd_abs_overlaps.to_string(),
                r.pairwise_non_obtuse.to_string(),
                csv_option(r.capacity_exact),
                r.sandwich_ok.to_string(),
            ]
        })
        .collect();
    to_csv(family, &REPORT_HEADER, &records)
}

#[derive(Debug, Serialize)]
struct ListSizeRow {
    family: &'static str,
    n: usize,
    rate: f64,
    list_size_lower_bound: u64,
}

pub fn sweep(args: &SweepArgs) -> CliResult<Status> {
    if !(args.tol > 0.0) {
        return Err(CliError::input("--tol must be positive"));
    }
    let opts = ReportOptions {
        r_infinity: RInfinityOptions {
            tol: args.tol,
            ..Default::default()
        },
        ..Default::default()
    };
    let format = args.output.format.unwrap_or(Format::Csv);
    let (name, rows) = match args.family {
        Family::Binary => {
            if args.steps < 2 {
                return Err(CliError::input("--steps must be at least 2"));
            }
            let rows = (0..args.steps)
                .into_par_iter()
                .map(|i| {
                    let c = i as f64 / (args.steps - 1) as f64;
                    let ch = binary_channel(c).expect("grid lies in [0, 1]");
                    report_row("binary", i, Some(c), &ch, &bounds_report_with(&ch, &opts))
                })
                .collect::<Vec<_>>();
            ("binary", rows)
        }
        Family::Random => {
            if args.alphabet == 0 || args.dim_min == 0 || args.dim_min > args.dim_max {
                return Err(CliError::input("need --alphabet >= 1 and 1 <= --dim-min <= --dim-max"));
            }
            let rows = (0..args.count)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream(args.seed, i as u64);
                    let dim = rng.random_range(args.dim_min..=args.dim_max);
                    let ch = random_channel(args.alphabet, dim, &mut rng);
                    report_row("random", i, None, &ch, &bounds_report_with(&ch, &opts))
                })
                .collect::<Vec<_>>();
            ("random", rows)
        }
        Family::TrineListsize => return list_size_sweep(args, format),
    };
    match format {
        Format::Json => emit_json(&args.output, &rows)?,
        Format::Csv => emit(&args.output, &to_report_csv(name, &rows)?)?,
    }
    Ok(Status::Ok)
}

fn list_size_sweep(args: &SweepArgs, format: Format) -> CliResult<Status> {
    let t = trine_channel();
    let a = absolute_overlap_matrix(&t).into_matrix();
    let rows = (1..=args.n_max)
        .map(|n| {
            min_list_size_for_rate(&t, &a, args.rate, n)
                .map(|l| ListSizeRow {
                    family: "trine-listsize",
                    n,
                    rate: args.rate,
                    list_size_lower_bound: l,
                })
                .map_err(CliError::input)
        })
        .collect::<CliResult<Vec<_>>>()?;
    match format {
        Format::Json => emit_json(&args.output, &rows)?,
        Format::Csv => {
            let records: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.family.to_string(), r.n.to_string(), csv_float(r.rate), r.list_size_lower_bound.to_string()])
                .collect();
            emit(&args.output, &to_csv("trine-listsize", &["family", "n", "rate", "list_size_lower_bound"], &records)?)?;
        }
    }
    Ok(Status::Ok)
}
