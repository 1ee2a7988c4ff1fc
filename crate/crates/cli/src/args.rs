// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cqzl", version, about = "Zero-error list-decoding bounds and list-2 codes for pure-state CQ channels")]
pub struct Cli {
    /// Worker threads for parallel sections (0 = one per core).
    #[arg(long, env = "CQZL_THREADS", default_value_t = 0, global = true)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Absolute overlaps, PSD test and pairwise non-obtuse phase test.
    Analyze(AnalyzeArgs),
    /// Achievability, converse and R_inf bounds with certificates.
    Bounds(BoundsArgs),
    /// Expurgated list-2 code with its decoding measurement and verification.
    Construct(ConstructArgs),
    /// Re-verify a bundle written by `construct` against a channel file.
    Verify(VerifyArgs),
    /// Bounds or list sizes over a parameter family.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Tolerance of the structural tests.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Largest accepted R_inf duality gap, in bits.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed of the converse local search.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Block length.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// List size checked by the verifier.
    #[arg(long, default_value_t = 2)]
    pub list_size: usize,
    /// Store outcome operators as vectors `v` of `|v><v|` instead of dense matrices.
    #[arg(long)]
    pub rank_one: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub list_size: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Binary channels with overlap c on an even grid over [0, 1].
    Binary,
    /// Trine list-size lower bound for n = 1..n-max.
    TrineListsize,
    /// Random channels.
    Random,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Grid points for `binary`.
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    /// Largest block length for `trine-listsize`.
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    /// Rate in bits for `trine-listsize`.
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    /// Number of channels for `random`.
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long, default_value_t = 3)]
    pub alphabet: usize,
    #[arg(long, default_value_t = 2)]
    pub dim_min: usize,
    #[arg(long, default_value_t = 3)]
    pub dim_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest accepted R_inf duality gap, in bits.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}
