use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("series is identically zero to its precision")]
    ZeroDivisor,
    #[error("unsupported weight {0} for this operation")]
    BadWeight(String),
    #[error("unsupported weight {0}: no basis construction available")]
    UnsupportedWeight(String),
    #[error("precision too low: {0}")]
    PrecisionTooLow(String),
    #[error("incompatible shapes: {0}")]
    IncompatibleShapes(String),
    #[error("incompatible precision: {0}")]
    IncompatiblePrecision(String),
    #[error("leading Fourier-Jacobi coefficient is not invertible")]
    NonInvertibleLeadingCoefficient,
    #[error("series is not symmetric at (m, n, r) = ({m}, {n}, {r})")]
    NotSymmetric { m: i64, n: i64, r: String },
    #[error("infinite zeta support: {0}")]
    InfiniteSupport(String),
    #[error("degenerate gram matrix")]
    DegenerateGram,
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "DivisionByZero",
            Error::ZeroDivisor => "ZeroDivisor",
            Error::BadWeight(_) => "BadWeight",
            Error::UnsupportedWeight(_) => "UnsupportedWeight",
            Error::PrecisionTooLow(_) => "PrecisionTooLow",
            Error::IncompatibleShapes(_) => "IncompatibleShapes",
            Error::IncompatiblePrecision(_) => "IncompatiblePrecision",
            Error::NonInvertibleLeadingCoefficient => "NonInvertibleLeadingCoefficient",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::InfiniteSupport(_) => "InfiniteSupport",
            Error::DegenerateGram => "DegenerateGram",
            Error::InvalidLattice(_) => "InvalidLattice",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
