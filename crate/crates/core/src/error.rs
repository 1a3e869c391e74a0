use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse failure at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-positive price at (row {row}, col {col}): {value}")]
    NonPositivePrice { row: usize, col: usize, value: f64 },

    #[error("missing value at (row {row}, col {col})")]
    MissingValue { row: usize, col: usize },

    #[error("non-monotone timestamps at row {row}")]
    NonMonotoneTimestamps { row: usize },

    #[error("non-finite value at (asset {asset}, obs {obs})")]
    NonFinite { asset: usize, obs: usize },

    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown wavelet filter {0:?} (available: haar, la8)")]
    UnknownFilter(String),

    #[error("series of length {len} is shorter than filter width {width}")]
    SeriesTooShort { len: usize, width: usize },

    #[error("requested {requested} levels but max_level is {max_level} for this series length")]
    TooManyLevels { requested: usize, max_level: usize },

    #[error("zero variance for asset {asset}{}", scale.map(|j| format!(" at scale {j}")).unwrap_or_default())]
    ZeroVariance { asset: String, scale: Option<usize> },

    #[error("no unbiased coefficients: boundary width {boundary_width} exceeds length {len}")]
    NoUnbiasedCoefficients { boundary_width: usize, len: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigensolver failed to converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("covariance is ill-conditioned (min/max eigenvalue ratio {ratio:e})")]
    IllConditioned { ratio: f64 },

    #[error("degenerate expected returns: frontier determinant {0:e}")]
    DegenerateReturns(f64),

    #[error("window {window} (start {start}): {source}")]
    Window {
        window: usize,
        start: usize,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used to map failures onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_)
            | Error::UnknownFilter(_)
            | Error::TooManyLevels { .. } => ErrorClass::Config,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::RaggedRow { .. }
            | Error::NonPositivePrice { .. }
            | Error::MissingValue { .. }
            | Error::NonMonotoneTimestamps { .. }
            | Error::NonFinite { .. }
            | Error::InvalidPanel(_)
            | Error::SeriesTooShort { .. }
            | Error::ZeroVariance { .. } => ErrorClass::Data,
            Error::NoUnbiasedCoefficients { .. }
            | Error::NotSymmetric(_)
            | Error::NoConvergence(_)
            | Error::IllConditioned { .. }
            | Error::DegenerateReturns(_) => ErrorClass::Numerical,
            Error::Window { source, .. } => source.class(),
        }
    }

    pub(crate) fn in_window(self, window: usize, start: usize) -> Error {
        Error::Window {
            window,
            start,
            source: Box::new(self),
        }
    }
}
