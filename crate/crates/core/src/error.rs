use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin {0}: expected a non-negative integer")]
    InvalidSpin(i64),

    #[error("spin 0 has a degenerate su(2) algebra; need s >= 1")]
    DegenerateSpin,

    #[error("particle number {n} exceeds truncation n_max = {n_max}")]
    ParticleNumberOutOfRange { n: u32, n_max: u32 },

    #[error("state has {found} modes, basis expects {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("mode weight {mu} outside [-{spin}, {spin}]")]
    InvalidMode { mu: i64, spin: u32 },

    #[error("operands act on different bases")]
    BasisMismatch,

    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("restriction (margin {margin}, column weight {column_weight:?}) selects no states")]
    EmptyRestriction {
        margin: u32,
        column_weight: Option<i64>,
    },

    #[error("operator is not hermitian (relative deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator couples sector (n={from_n}, w={from_w}) to (n={to_n}, w={to_w})")]
    NotBlockDiagonal {
        from_n: u32,
        from_w: i64,
        to_n: u32,
        to_w: i64,
    },

    #[error("function undefined at eigenvalue {eigenvalue} in sector (n={n}, w={weight})")]
    Pole { n: u32, weight: i64, eigenvalue: f64 },

    #[error("ĵ eigenvalue {value} in sector (n={n}, w={weight}) is not within {tolerance:e} of an integer")]
    NonIntegerJ {
        n: u32,
        weight: i64,
        value: f64,
        tolerance: f64,
    },

    #[error("precondition failed: {what} has relative norm {norm:e}")]
    Precondition { what: String, norm: f64 },

    #[error("alpha entry (row {row}, col {col}) of the {family} family fails verification: residual {residual:e}")]
    AlphaMismatch {
        family: String,
        row: usize,
        col: usize,
        residual: f64,
    },

    #[error("sub-diagonal entry ({row}, {col}) is not a nonzero constant: {entry}")]
    SingularPivot { row: usize, col: usize, entry: String },

    #[error("det(A - P) for θ = {theta} is the nonzero polynomial {det}")]
    NonzeroDeterminant { theta: i64, det: String },

    #[error("σ consistency row for θ = {theta} is the nonzero polynomial {poly}")]
    InconsistentSigma { theta: i64, poly: String },

    #[error("θ = {theta} does not belong to the {family} family for s = {spin}")]
    ParityMismatch {
        theta: i64,
        family: String,
        spin: u32,
    },

    #[error("θ = {theta} not allowed here: {expected}")]
    InvalidTheta { theta: i64, expected: String },

    #[error("construction is defined for s = {expected} only, got s = {spin}")]
    UnsupportedSpin { spin: u32, expected: u32 },

    #[error("certification of τ†_{theta} failed: {detail}")]
    Certification { theta: i64, detail: String },

    #[error("lattice scheme violated: {0}")]
    LatticeViolation(String),

    #[error("constructed vector for (n={n}, j={j}, jz={jz}) vanished before normalization")]
    ZeroVector { n: u32, j: u32, jz: i64 },

    #[error("invalid canonical label (n={n}, j={j}, jz={jz})")]
    InvalidLabel { n: u32, j: u32, jz: i64 },

    #[error("invalid suite configuration: {0}")]
    InvalidConfig(String),

    #[error("depends on a construction that failed: {0}")]
    Upstream(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
