use thiserror::Error;

use crate::fan::ColorId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("vectors are linearly dependent")]
    DependentInput,
    #[error("zero vector has no primitive generator")]
    ZeroVector,
    #[error("invalid colored fan: {0}")]
    InvalidFan(String),
    #[error("invalid horospherical datum: {0}")]
    InvalidDatum(String),
    #[error("fan is not Q-factorial (cone {0})")]
    NotQFactorial(usize),
    #[error("fan is not complete")]
    NotComplete,
    #[error("embedding is not projective")]
    NotProjective,
    #[error("ray {0} is spanned by more than one attached color")]
    AmbiguousRay(usize),
    #[error("unknown Dynkin node {0}")]
    UnknownNode(String),
    #[error("invalid Dynkin component {0}")]
    BadDynkinType(String),
    #[error("cone {0:?} is not a cone of the fan")]
    ConeNotInFan(Vec<usize>),
    #[error("linear conditions have no solution on cone {0}")]
    Inconsistent(usize),
    #[error("divisor is not Q-Cartier")]
    NotQCartier,
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("unknown divisor {0}")]
    UnknownDivisor(String),
    #[error("cones {0:?} and {1:?} meet outside the origin")]
    OverlappingCones(Vec<usize>, Vec<usize>),
    #[error("intersection does not reach top degree")]
    NotTopDegree,
    #[error("cone {0:?} is not a wall")]
    NotAWall(Vec<usize>),
    #[error("index {0} is not an extremal ray")]
    NotExtremal(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("color {0} is not in D0")]
    NotInD0(ColorId),
    #[error("only the full-space valuation cone is supported here")]
    ValuationConeMode,
    #[error("parse error at {path} (line {line}, column {column}): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unknown catalog entry {0}")]
    UnknownName(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
}
