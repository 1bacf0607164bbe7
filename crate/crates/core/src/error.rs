use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("negative eigenvalue {0:e} beyond clamp tolerance")]
    NegativeEigenvalue(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("direction is not a unit vector (norm {0})")]
    NotUnitVector(f64),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("Kraus operators are not trace preserving (completeness residual {0:e})")]
    NotTracePreserving(f64),

    #[error("correlation triple {0:?} is outside the physical tetrahedron")]
    OutsideTetrahedron([f64; 3]),

    #[error("state has {0} nonzero Schmidt coefficients, at most 2 allowed")]
    TooManySchmidtTerms(usize),

    #[error("total dimension {0} exceeds the optimizer bound of 64")]
    DimensionBound(usize),

    #[error("state is not in a supported family: {0}")]
    UnsupportedFamily(String),

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
