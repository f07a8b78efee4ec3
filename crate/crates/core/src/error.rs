use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("non-finite value at {location}")]
    NonFiniteInput { location: String },

    #[error("batch has no samples or no feature dimensions")]
    EmptyBatch,

    #[error("label count {labels} does not match sample count {samples}")]
    LabelMismatch { samples: usize, labels: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix has eigenvalue {eigenvalue:.3e} below the PSD tolerance")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("eigendecomposition failed: {0}")]
    DecompositionFailure(String),

    #[error("spectral radius {radius:.6} is not below 1")]
    SpectralRadiusTooLarge { radius: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("metric requires class labels")]
    MissingLabels,

    #[error("need at least {required} samples, found {found}")]
    TooFewSamples { required: usize, found: usize },

    #[error("sample {point} has a zero-distance neighbour (duplicate points)")]
    DegenerateNeighborhood { point: usize },

    #[error("need at least {required} generations, found {found}")]
    TooFewGenerations { required: usize, found: usize },

    #[error("window {window} exceeds series length {len}")]
    WindowTooLarge { window: usize, len: usize },

    #[error("trace has {len} generations, need at least {required}")]
    TraceTooShort { len: usize, required: usize },

    #[error("signal has zero RMS")]
    ZeroSignal,

    #[error("initial batches too close: FID {fid:.6} < {required}")]
    InitsTooClose { fid: f64, required: f64 },

    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("corrupt WAV header: {0}")]
    CorruptHeader(String),

    #[error("sample rate mismatch: {expected} Hz vs {found} Hz")]
    SampleRateMismatch { expected: u32, found: u32 },

    #[error("signal of {len} samples is shorter than one {window}-sample window")]
    SignalTooShort { len: usize, window: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("format error in {location}: {message}")]
    Format { location: String, message: String },

    #[error("{metric}: {source}")]
    Metric {
        metric: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("generation {generation}: {source}")]
    AtGeneration {
        generation: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn metric(metric: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Metric {
            metric,
            source: Box::new(e),
        }
    }

    pub(crate) fn at_generation(generation: usize) -> impl FnOnce(Error) -> Error {
        move |e| Error::AtGeneration {
            generation,
            source: Box::new(e),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    /// Short machine-readable tag for the variant, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFinite { .. } | Error::NonFiniteInput { .. } => "NonFinite",
            Error::EmptyBatch => "EmptyBatch",
            Error::LabelMismatch { .. } => "LabelMismatch",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::NotPositiveSemidefinite { .. } => "NotPositiveSemidefinite",
            Error::DecompositionFailure(_) => "DecompositionFailure",
            Error::SpectralRadiusTooLarge { .. } => "SpectralRadiusTooLarge",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::MissingLabels => "MissingLabels",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::DegenerateNeighborhood { .. } => "DegenerateNeighborhood",
            Error::TooFewGenerations { .. } => "TooFewGenerations",
            Error::WindowTooLarge { .. } => "WindowTooLarge",
            Error::TraceTooShort { .. } => "TraceTooShort",
            Error::ZeroSignal => "ZeroSignal",
            Error::InitsTooClose { .. } => "InitsTooClose",
            Error::UnsupportedEncoding(_) => "UnsupportedEncoding",
            Error::CorruptHeader(_) => "CorruptHeader",
            Error::SampleRateMismatch { .. } => "SampleRateMismatch",
            Error::SignalTooShort { .. } => "SignalTooShort",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Format { .. } => "FormatError",
            Error::Metric { source, .. } | Error::AtGeneration { source, .. } => source.kind(),
            Error::Config(_) => "ConfigError",
            Error::Io { .. } => "IoError",
        }
    }

    /// Strips `Metric` / `AtGeneration` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Metric { source, .. } | Error::AtGeneration { source, .. } => source.root(),
            other => other,
        }
    }
}
