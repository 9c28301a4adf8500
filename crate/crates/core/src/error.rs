//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by ingestion, spectral analysis, distance construction,
/// embedding and clustering.
#[derive(Debug, Error)]
pub enum Error {
    #[error("csv parse error at data row {row}, column {col}: {msg}")]
    CsvParse { row: usize, col: usize, msg: String },

    #[error("flow matrix is not square: {rows} rows but {cols} columns")]
    NotSquare { rows: usize, cols: usize },

    #[error("negative entry {value} at data row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("row/column label mismatch at position {position}: row '{row_label}' vs column '{col_label}'")]
    LabelMismatch {
        position: usize,
        row_label: String,
        col_label: String,
    },

    #[error("duplicate label '{0}'")]
    DuplicateLabel(String),

    #[error("invalid label '{0}': {1}")]
    BadLabel(String, String),

    #[error("matrix has no positive entry")]
    NoPositiveEntry,

    #[error("matrix is not symmetric: |m[{i},{j}] - m[{j},{i}]| = {deviation}")]
    NotSymmetric { i: usize, j: usize, deviation: f64 },

    #[error("entries sum to {0}, expected 1 within 1e-12")]
    BadTotal(f64),

    #[error("vertex '{0}' has zero weight")]
    ZeroWeight(String),

    #[error("quasi-symmetric fit did not converge after {sweeps} sweeps (max relative margin residual {residual:e})")]
    IpfNonConvergence { sweeps: usize, residual: f64 },

    #[error("zero {0} sum at index {1}: quasi-symmetric fit requires positive margins")]
    ZeroMargin(&'static str, usize),

    #[error("pure-diagonal exchange matrix: no off-diagonal structure remains")]
    PureDiagonal,

    #[error("vertex '{0}' only had self-flow: zero weight after removing the diagonal")]
    SelfFlowOnly(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("leading eigenvalue {0} deviates from 1 by more than 1e-8: malformed exchange matrix")]
    MalformedSpectrum(f64),

    #[error("t-step limit requested on a non-regular chain (lambda_1 = {lambda_1}, lambda_min = {lambda_min})")]
    NotRegular { lambda_1: f64, lambda_min: f64 },

    #[error("irreducible distance on disconnected graph (lambda_1 = {0})")]
    DisconnectedIrreducible(f64),

    #[error("exchange matrix not diffusive (minimum eigenvalue {0})")]
    NotDiffusive(f64),

    #[error("custom spectral weight is negative ({value}) at eigenvalue {lambda}")]
    NegativeSpectralWeight { lambda: f64, value: f64 },

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("matrix has nonzero diagonal entry {value} at vertex {index}")]
    NonzeroDiagonal { index: usize, value: f64 },

    #[error("negative squared distance {value} at ({i},{j}) exceeds the clamping tolerance")]
    NegativeDistance { i: usize, j: usize, value: f64 },

    #[error("non-finite value {value} at ({i},{j}): {context}")]
    NonFinite {
        i: usize,
        j: usize,
        value: f64,
        context: String,
    },

    #[error("parameter out of range: {0}")]
    BadParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
