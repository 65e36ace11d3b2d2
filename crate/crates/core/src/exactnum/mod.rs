//! Exact scalars: big rationals and single-radical quadratic extensions.
//!
//! Every computation in this crate happens in `Q(√n)` for one square-free
//! `n` at a time. Values from different radicands may be *ordered* against
//! each other, but combining them arithmetically is an error rather than an
//! approximation.

mod linalg;
mod parse;
mod poly;
mod quad;
mod sqfree;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

pub use linalg::{determinant, nullspace, rank, solve};
pub use parse::{parse_rational, parse_scalar};
pub use poly::Poly;
pub use quad::QuadExt;
pub use sqfree::{is_square_free, square_free_decompose, SqFreeDecomp};

/// Arbitrary-precision rational, always stored in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    #[error("incompatible radicands sqrt({left}) and sqrt({right})")]
    IncompatibleRadicands { left: u64, right: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error at column {column}: {message}")]
    Parse { message: String, column: usize },
    #[error("radicand {0} is outside the supported range")]
    RadicandTooLarge(String),
    #[error("singular linear system")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// `p/q` as a [`Rational`]. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// The integer `n` as a [`Rational`].
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Binomial coefficient as an exact integer; zero when `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}
