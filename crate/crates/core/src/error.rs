use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("non-square image ({width}x{height})")]
    NonSquare { width: usize, height: usize },

    #[error("zero-size image")]
    EmptyImage,

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("smoothing requested with a disabled smoothing spec")]
    SmoothingDisabled,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("all-zero image: intensity normalization is undefined")]
    ZeroImage,

    #[error("operator dimension {dim} exceeds the eigensolver cap {cap}; downsample to at most {max_side}x{max_side} or raise the cap")]
    DimensionTooLarge { dim: usize, cap: usize, max_side: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("eigensolver failed to converge for eigenvalue {index}")]
    NoConvergence { index: usize },

    #[error("invalid eigenbasis: {0}")]
    InvalidBasis(String),

    #[error("degenerate PR range: every mode has the same participation ratio")]
    DegeneratePrRange,

    #[error("histogram needs at least {required} bins, got {found}")]
    TooFewBins { required: usize, found: usize },

    #[error("Lorentzian fit diverged (non-finite parameters)")]
    FitDiverged,

    #[error("empty selection: no mode has PR below {threshold}; fall back to keeping all modes")]
    EmptySelection { threshold: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("SNR undefined for zero signal")]
    ZeroSignal,

    #[error("target SNR {target_db} dB unreachable within the photon-scale search range")]
    SnrUnreachable { target_db: f64 },

    #[error("image side {side} is smaller than the {window}x{window} window")]
    ImageTooSmall { side: usize, window: usize },

    #[error("{0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
