use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants split into three broad classes, reflected by [`Error::class`]:
/// malformed or out-of-domain input, detected mathematical inconsistency
/// (an invariant that should hold for valid data fails), and insufficient
/// truncation order for a requested computation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix has determinant {0}, expected 1")]
    NotUnimodular(String),

    #[error("matrix is not integral: {0}")]
    NotIntegral(String),

    #[error("element does not belong to the subgroup {0}")]
    NotInSubgroup(String),

    #[error("element is not parabolic: {0}")]
    NotParabolic(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coset enumeration exceeded the bound of {bound} cosets")]
    CosetBoundExceeded { bound: usize },

    #[error("no cusp width found below {bound} for cusp {cusp}")]
    WidthNotFound { cusp: String, bound: u64 },

    #[error("eigenvalue {value} lies {distance:.3e} from the unit circle (tolerance {tolerance:.1e})")]
    NonUnitaryEigenvalue {
        value: String,
        distance: f64,
        tolerance: f64,
    },

    #[error("numerically ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("truncation underflow: {0}")]
    TruncationUnderflow(String),

    #[error("consistency check failed: {0}")]
    Inconsistent(String),

    #[error("singular matrix in {0}")]
    Singular(String),

    #[error("parse error: {0}")]
    Parse(String),
}

/// Coarse error class, used by callers that map failures to process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or out-of-domain input.
    Input,
    /// A mathematical invariant failed on data that parsed cleanly.
    Consistency,
    /// The requested truncation order cannot support the computation.
    Truncation,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            NotUnimodular(_) | NotIntegral(_) | NotInSubgroup(_) | NotParabolic(_)
            | DimensionMismatch(_) | InvalidInput(_) | Parse(_) => ErrorClass::Input,
            CosetBoundExceeded { .. } | WidthNotFound { .. } => ErrorClass::Input,
            NonUnitaryEigenvalue { .. } | IllConditioned(_) | Inconsistent(_) | Singular(_) => {
                ErrorClass::Consistency
            }
            TruncationUnderflow(_) => ErrorClass::Truncation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
