// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("channel has no states")]
    EmptyChannel,
    #[error("state {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("state {0} is the zero vector")]
    ZeroVector(usize),
    #[error("state {index} has norm {norm}, deviating from 1 by more than {tol}")]
    NotNormalized { index: usize, norm: f64, tol: f64 },
    #[error("state {0} contains a non-finite amplitude")]
    NonFinite(usize),
    #[error("overlap parameter {0} is outside [0, 1]")]
    OverlapOutOfRange(f64),
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("symbol {symbol} is outside the alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("Kronecker power would have {rows} rows, above the cap of {cap}")]
    SizeCapExceeded { rows: usize, cap: usize },
    #[error("matrix is not diagonally dominant (row {row})")]
    NotDiagonallyDominant { row: usize },
    #[error("negative radicand {value} in diagonal fix-up of row {row}")]
    NegativeRadicand { row: usize, value: f64 },
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("Gram matrix is singular or ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("matrix is not a feasible converse certificate: {0}")]
    InfeasibleConverseMatrix(String),
    #[error("list size does not fit in 64 bits (log2 = {0})")]
    ListSizeOverflow(f64),
    #[error("channel is trivial: Q_P = 1, no expurgated code exists")]
    TrivialChannel,
    #[error("block length {n} too small: code size would be {size}, need n >= {min_n}")]
    BlockLengthTooSmall { n: usize, size: u64, min_n: usize },
    #[error("code size {0} exceeds the construction cap")]
    CodeTooLarge(u64),
    #[error("expurgation failed after {0} attempts")]
    AttemptsExhausted(u32),
    #[error("outcome probabilities sum to {0}, not 1")]
    ProbabilitySum(f64),
    #[error("message index {index} out of range for {size} messages")]
    MessageOutOfRange { index: usize, size: usize },
    #[error("invalid list size {0}")]
    InvalidListSize(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("channel hash mismatch: expected {expected}, found {found}")]
    HashMismatch { expected: String, found: String },
}
