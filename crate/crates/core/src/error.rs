use core::fmt;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    InvalidParameter(&'static str),
    /// Vector or matrix dimensions do not line up.
    DimensionMismatch { expected: usize, found: usize },
    /// A block or coarse matrix could not be factored.
    Singular,
    /// The frequency is excluded from the analysis (near-singular symbol).
    ExcludedFrequency,
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Singular => write!(f, "singular matrix"),
            Error::ExcludedFrequency => write!(f, "frequency excluded (near-singular symbol)"),
        }
    }
}

impl core::error::Error for Error {}
