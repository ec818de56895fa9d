use thiserror::Error;

use crate::fields::Field;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivideByZero,
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(Field, Field),
    #[error("{0} has fewer than four elements")]
    FieldTooSmall(Field),
    #[error("operation not supported over {0}")]
    UnsupportedField(Field),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid literal {literal:?} for {field}")]
    InvalidLiteral { field: Field, literal: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("dimension too small: {0}")]
    DimensionTooSmall(String),
    #[error("odd dimension {0}; a 2n x 2n matrix is required")]
    OddDimension(usize),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix is not diagonal")]
    NotDiagonal,
    #[error("determinant is {0}, expected 1")]
    NotUnimodular(String),
    #[error("determinant of D ({d}) differs from determinant of M ({m})")]
    DeterminantMismatch { d: String, m: String },
    #[error("upper-right block is singular")]
    SingularUpperRight,
    #[error("ker(A) and ker(B) intersect nontrivially")]
    KernelOverlap,
    #[error("coker(A) and coker(B) intersect nontrivially")]
    CokernelOverlap,
    #[error("matrix is not a commutator of GL_{size}({field})")]
    NoDecomposition { size: usize, field: Field },
    #[error("commutator search budget exhausted after {0} candidates")]
    DecompositionFailed(usize),
    #[error("no five-layer witness found")]
    NotFound,
    #[error("exhaustive verification failed: {0}")]
    VerificationFailed(String),
    #[error("non-finite entry at ({0}, {1})")]
    NonFiniteEntry(usize, usize),
    #[error("determinant must be positive, got {0}")]
    OrientationError(String),
    #[error("malformed layer list: {0}")]
    MalformedFactorization(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable snake-case identifier for machine-readable reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DivideByZero => "divide_by_zero",
            Error::FieldMismatch(..) => "field_mismatch",
            Error::FieldTooSmall(_) => "field_too_small",
            Error::UnsupportedField(_) => "unsupported_field",
            Error::InvalidField(_) => "invalid_field",
            Error::InvalidLiteral { .. } => "invalid_literal",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::DimensionTooSmall(_) => "dimension_too_small",
            Error::OddDimension(_) => "odd_dimension",
            Error::SingularMatrix => "singular_matrix",
            Error::NotDiagonal => "not_diagonal",
            Error::NotUnimodular(_) => "not_unimodular",
            Error::DeterminantMismatch { .. } => "determinant_mismatch",
            Error::SingularUpperRight => "singular_upper_right",
            Error::KernelOverlap => "kernel_overlap",
            Error::CokernelOverlap => "cokernel_overlap",
            Error::NoDecomposition { .. } => "no_decomposition",
            Error::DecompositionFailed(_) => "decomposition_failed",
            Error::NotFound => "not_found",
            Error::VerificationFailed(_) => "verification_failed",
            Error::NonFiniteEntry(..) => "non_finite_entry",
            Error::OrientationError(_) => "orientation_error",
            Error::MalformedFactorization(_) => "malformed_factorization",
            Error::Parse(_) => "parse",
        }
    }
}
