use thiserror::Error;

/// Errors raised by the analysis kernels and the spec loader.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix has no entries or a non-finite entry")]
    NonFinite,

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("point {re}{im:+}i is within the guard distance of the spectrum")]
    SpectrumHit { re: f64, im: f64 },

    #[error("eigenvalue {re}{im:+}i lies too close to the region boundary")]
    BoundaryHit { re: f64, im: f64 },

    #[error("matrix is not selfadjoint in the Krein inner product (defect {defect:e})")]
    NotJSelfadjoint { defect: f64 },

    #[error("{re}{im:+}i is not an eigenvalue within tolerance")]
    NotAnEigenvalue { re: f64, im: f64 },

    #[error("eigenspace transport failed: {0}")]
    TransportFailure(String),

    #[error("basis is rank deficient (smallest singular value {sigma_min:e})")]
    RankDeficientBasis { sigma_min: f64 },

    #[error("product is not J-selfadjoint (defect {defect:e}); this is an internal bug")]
    SelfadjointnessViolation { defect: f64 },

    #[error("partial multiplicity {0} exceeds the supported maximum of 3")]
    MultiplicityTooLarge(usize),

    #[error("indefinite form degenerated on a root subspace: {0}")]
    DegenerateForm(String),

    #[error("invalid fundamental symmetry: {0}")]
    InvalidSymmetry(String),

    #[error("invalid family rule: {0}")]
    InvalidRule(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error at `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable name used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonSquare { .. } => "NonSquare",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NonFinite => "NonFinite",
            Error::NumericalBreakdown(_) => "NumericalBreakdown",
            Error::SpectrumHit { .. } => "SpectrumHit",
            Error::BoundaryHit { .. } => "BoundaryHit",
            Error::NotJSelfadjoint { .. } => "NotJSelfadjoint",
            Error::NotAnEigenvalue { .. } => "NotAnEigenvalue",
            Error::TransportFailure(_) => "TransportFailure",
            Error::RankDeficientBasis { .. } => "RankDeficientBasis",
            Error::SelfadjointnessViolation { .. } => "SelfadjointnessViolation",
            Error::MultiplicityTooLarge(_) => "MultiplicityTooLarge",
            Error::DegenerateForm(_) => "DegenerateForm",
            Error::InvalidSymmetry(_) => "InvalidSymmetry",
            Error::InvalidRule(_) => "InvalidRule",
            Error::Parse(_) => "ParseError",
            Error::Validation { .. } => "ValidationError",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
