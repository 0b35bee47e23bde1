use thiserror::Error;

use crate::places::Place;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero is not a valid input here")]
    ZeroInput,

    #[error("moduli are not pairwise coprime")]
    NotCoprime,

    #[error("modulus must be odd")]
    EvenModulus,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate form: coefficient {0} is zero")]
    Degenerate(usize),

    #[error("unary forms cannot be isotropic")]
    Unary,

    #[error("form is anisotropic at {0}")]
    Anisotropic(Place),

    #[error("cofactor with {digits} digits exceeds the factorization bound of {bound} digits")]
    FactorBound { digits: usize, bound: usize },

    #[error("resource limit reached: {0}")]
    Resource(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// A postcondition that the algorithms guarantee did not hold.
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
