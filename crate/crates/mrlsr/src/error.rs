use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("input is not valid UTF-8")]
    NotUtf8,

    #[error("no data rows found")]
    EmptyInput,

    #[error("row {row} has {got} columns, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },

    #[error("cell at row {row}, column {col} is not a finite number: {value:?}")]
    BadCell {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("target column {0:?} not found")]
    TargetColumnNotFound(String),

    #[error("no feature columns remain after extracting the target")]
    NoFeatureColumns,

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter {name} = {value}: {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("fold count {fold_count} exceeds sample count {n}")]
    FoldCountExceedsSamples { fold_count: usize, n: usize },

    #[error("split of {n} rows at fraction {fraction} leaves an empty part")]
    EmptySplit { n: usize, fraction: f64 },

    #[error("bandwidth heuristic degenerate: all rows are identical")]
    DegenerateBandwidth,

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below -{tolerance:e}")]
    NotPositiveSemidefinite { eigenvalue: f64, tolerance: f64 },

    #[error("symmetric eigendecomposition did not converge")]
    DecompositionFailed,

    #[error("targets vanish on the range of the kernel matrix; the m = {m} problem is degenerate")]
    DegenerateTargets { m: f64 },

    #[error(
        "root search did not converge within {max_iter} iterations; best bracket [{lo}, {hi}]"
    )]
    RootNotConverged { max_iter: usize, lo: f64, hi: f64 },

    #[error(
        "no multi-start trajectory converged; starts {starts:?} reached residuals {residuals:?}"
    )]
    NoRootFound {
        starts: Vec<f64>,
        residuals: Vec<f64>,
    },

    #[error("line search failed: objective does not decrease at step {step:e}")]
    LineSearchFailure { step: f64 },

    #[error("dual gradient undefined: a^T K a = 0 with a != 0 and m = {m} < 2")]
    GradientSingularity { m: f64 },

    #[error("instance size {n} exceeds the oracle guardrail of {max}")]
    InstanceTooLarge { n: usize, max: usize },

    #[error("scaled RMSE undefined: maximum target {max_target} is not positive")]
    NonPositiveMaxTarget { max_target: f64 },

    #[error("model JSON malformed: {0}")]
    ModelJson(#[from] serde_json::Error),

    #[error("model document invalid: {reason}")]
    InvalidModel { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
