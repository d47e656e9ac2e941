//! rqlab — exact invariants of real quadratic fields `Q(sqrt(D))` and of the
//! first layer `K1 = Q(sqrt(2), sqrt(D))` of their cyclotomic Z2-towers.
//!
//! Everything downstream of the CLI is exact arithmetic: arbitrary-precision
//! integers and rationals, continued fractions for fundamental units,
//! Gauss-convention binary quadratic forms for narrow 2-class groups, and a
//! quadratic-tower square test in `K1`. Floating point never enters a
//! decision path.
//!
//! Module map:
//! - [`arith`]   primality, factorization, Jacobi and quartic residue symbols
//! - [`gaussian`] arithmetic in Z\[i\]: gcd, primary primes, quadratic symbol
//! - [`pell`]    continued fractions, fundamental units, x±1 decompositions
//! - [`qforms`]  form reduction/composition, genus theory, Redei matrix,
//!   2-Sylow of the narrow class group, principality by representation
//! - [`biquad`]  exact arithmetic in K1, squareness, unit-index classification,
//!   the 2-class-number formula for |A1|
//! - [`verdict`] case classification and the decision engine for the Iwasawa
//!   module of the tower
//! - [`suites`]  named verification sweeps (also exposed as `rqlab verify`)
//! - [`cache`], [`scan`], [`cli`] batch front end

pub mod arith;
pub mod biquad;
pub mod cache;
pub mod cli;
pub mod gaussian;
pub mod pell;
pub mod qforms;
pub mod scan;
pub mod suites;
pub mod verdict;

use num_bigint::BigInt;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("undefined symbol: {0}")]
    UndefinedSymbol(String),
    #[error("resource guard: {0}")]
    ResourceGuard(String),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn inconsistency(msg: impl Into<String>) -> Error {
    Error::Inconsistency(msg.into())
}

/// Convenience constructor used throughout the tests and internals.
pub fn bi(v: i64) -> BigInt {
    BigInt::from(v)
}
