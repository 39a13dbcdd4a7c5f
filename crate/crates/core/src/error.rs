use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
    #[error("modulus {0:?} is not a monic irreducible polynomial of the stated degree")]
    BadModulus(Vec<u32>),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("one-form is not closed")]
    NotClosed,
    #[error("not a p-th power: {0}")]
    NotPthPower(String),
    #[error("cocharacter is not 1-bounded: w[{a}] - w[{b}] = {diff}")]
    NotOneBounded { a: usize, b: usize, diff: i64 },
    #[error("matrix does not lie in {0}")]
    NotInSubgroup(&'static str),
    #[error("matrix is not supported on g_1")]
    NotInG1,
    #[error("enumeration of {size} elements exceeds the limit {limit} (set FZIP_MAX_ENUM to override)")]
    SizeLimit { size: u128, limit: u128 },
    #[error("unsupported prime {0}")]
    UnsupportedPrime(u32),
    #[error("p-curvature operator failed the R-linearity check")]
    NotLinear,
    #[error("bracket degree exceeds the word-length cap {0}")]
    DegreeOverflow(usize),
    #[error("matrix is not invertible over the ring")]
    NotInvertible,
    #[error("{0}")]
    Invalid(String),
}
