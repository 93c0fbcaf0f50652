use thiserror::Error;

use crate::linalg::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} has shape {}x{}, expected {}x{}", found.0, found.1, expected.0, expected.1)]
    ShapeMismatch {
        what: String,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("antisymmetry violated at c[{i}][{j}][{m}]")]
    AntisymmetryViolation { i: usize, j: usize, m: usize },

    #[error("Jacobi identity violated for basis triple ({i}, {j}, {l}); cyclic sum = {sum:?}")]
    JacobiViolation {
        i: usize,
        j: usize,
        l: usize,
        sum: Vec<String>,
    },

    #[error("subspace is not a subalgebra: bracket of basis vectors {i} and {j} leaves the span")]
    NotASubalgebra { i: usize, j: usize },

    #[error("invalid subspace: {0}")]
    InvalidSubspace(String),

    #[error("ideal decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error("invalid complex structure: {0}")]
    InvalidJ(String),

    #[error("not a Lie algebra homomorphism on basis pair ({a}, {b}); defect {defect:e}")]
    NotAHomomorphism { a: usize, b: usize, defect: f64 },

    #[error("split mismatch: {0}")]
    SplitMismatch(String),

    #[error("target algebra admits no ad-invariant inner product (not compact)")]
    NoInvariantInnerProduct,

    #[error("unsupported target algebra: {0}")]
    UnsupportedTargetAlgebra(String),

    #[error("unknown preset: {0}")]
    UnknownPreset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn jacobi(i: usize, j: usize, l: usize, sum: &[Rational]) -> Self {
        Error::JacobiViolation {
            i,
            j,
            l,
            sum: sum.iter().map(|q| q.to_string()).collect(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
