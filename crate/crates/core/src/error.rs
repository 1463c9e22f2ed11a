use thiserror::Error;

/// Unified error type for the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Tensor or field arguments disagree in spatial dimension.
    #[error("dimension mismatch: expected {expected}D, got {got}D")]
    DimensionMismatch { expected: usize, got: usize },

    /// Only 2 and 3 spatial dimensions are supported.
    #[error("unsupported spatial dimension {0}")]
    UnsupportedDimension(usize),

    /// A macroscopic strain with zero norm (or zero relevant part) was supplied.
    #[error("macroscopic strain is zero (or its relevant part vanishes)")]
    ZeroMacroStrain,

    /// A macroscopic strain mixes spherical and deviatoric parts where a pure
    /// one is required.
    #[error("macroscopic strain mixes spherical and deviatoric parts")]
    MixedMacroStrain,

    /// The zero frequency has no orthogonal Green decomposition.
    #[error("zero frequency vector")]
    ZeroFrequency,

    /// An iterative solve ran out of iterations.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    /// Moduli must be strictly positive.
    #[error("non-positive modulus: {0}")]
    NonPositiveModulus(f64),

    /// Contrast outside the accepted range, or one that would drive a modulus
    /// non-positive.
    #[error("invalid contrast {0}")]
    InvalidContrast(f64),

    /// An experiment set does not carry the number of strain fields its load
    /// basis requires.
    #[error("incomplete load basis: need {needed} strain fields, got {got}")]
    IncompleteBasis { needed: usize, got: usize },

    /// Fields that must share one grid do not.
    #[error("grid mismatch between fields")]
    GridMismatch,

    /// A field file does not start with the expected magic bytes.
    #[error("bad magic bytes (not a field file)")]
    BadMagic,

    /// A field file declares a format version this build cannot read.
    #[error("unsupported field file version {0}")]
    UnsupportedVersion(u16),

    /// A field file ends before its declared payload does.
    #[error("truncated payload at byte offset {offset}")]
    TruncatedPayload { offset: u64 },

    /// Configuration text could not be parsed.
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
