//! Exact scalar arithmetic: rationals, the biquadratic ring, prime fields,
//! dense matrices over any of these, and local symbols (p-adic valuation,
//! Hilbert symbol).
//!
//! Every value here is immutable and every operation is a pure function, so all
//! of it is safe to use from parallel sweeps.

mod biquad;
mod fp;
mod local;
mod matrix;
mod ring;
mod snf;

pub use biquad::{galois_act, BiquadElement, GaloisElement};
pub use fp::{invmod, mulmod, FpScalar};
pub use local::{
    hilbert_symbol, is_prime, is_rational_square, padic_valuation, primes_up_to, squarefree_part,
    Place,
};
pub use matrix::{block_diag, kronecker, RingMatrix};
pub use ring::Ring;
pub use snf::{saturated_row_basis, skew_normal_form, smith_normal_form, unimodular_inverse};

pub use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

/// Exact rational scalar. The backing type keeps the fraction reduced with a
/// positive denominator, which is exactly the invariant the rest of the crate
/// relies on.
pub type Rational = BigRational;

/// Errors from the exact-arithmetic layer.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("p-adic valuation undefined at zero")]
    ZeroValuation,
    #[error("hilbert symbol undefined for zero argument")]
    ZeroArgument,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("matrix is singular or has a non-invertible pivot")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("malformed rational literal: {0}")]
    ParseRational(String),
}

/// Integer as a rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// n/d as a rational; panics on d = 0 (programming error in literals).
pub fn rat(n: i64, d: i64) -> Rational {
    assert!(d != 0, "zero denominator in rational literal");
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses "p", "-p" or "p/q" into a rational.
pub fn parse_rational(s: &str) -> Result<Rational, ExactError> {
    let bad = || ExactError::ParseRational(s.to_string());
    let mut parts = s.splitn(2, '/');
    let num: BigInt = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    match parts.next() {
        None => Ok(Rational::from_integer(num)),
        Some(d) => {
            let den: BigInt = d.trim().parse().map_err(|_| bad())?;
            if den == BigInt::from(0) {
                return Err(bad());
            }
            Ok(Rational::new(num, den))
        }
    }
}

/// Renders a rational as "p" or "p/q" (the inverse of [`parse_rational`]).
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_literals_round_trip() {
        for s in ["3", "-1", "2/3", "-7/5", "0"] {
            let v = parse_rational(s).unwrap();
            assert_eq!(format_rational(&v), s);
        }
        assert_eq!(parse_rational("4/6").unwrap(), rat(2, 3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
