//! Exact algebra over small finite fields for 1-truncated displays (F-zips)
//! of `GL(d)`, their height-one group schemes, the Cartier operator and
//! p-curvature, and the search for connections satisfying the Katz
//! condition.

pub mod artinmilne;
pub mod error;
pub mod field;
pub mod freelie;
pub mod fzip;
pub mod groupdata;
pub mod katz;
pub mod lau;
pub mod linalg;
pub mod matrix;
pub mod poly;
pub mod verify;

pub use error::{Error, Result};

/// Default cap on exhaustive enumerations; `FZIP_MAX_ENUM` overrides it.
pub const DEFAULT_MAX_ENUM: u128 = 10_000_000;

pub fn enumeration_limit() -> u128 {
    std::env::var("FZIP_MAX_ENUM").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MAX_ENUM)
}
