//! Exact rational scalars and their text form.
//!
//! All geometry uses arbitrary-precision rationals. The canonical text form
//! is `"p/q"` with `q > 0` and `gcd(p, q) = 1`; it is what file formats and
//! canonical cell keys use.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar used throughout the geometry kernel.
pub type Scalar = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseScalarError {
    #[error("empty rational literal")]
    Empty,
    #[error("bad rational literal {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Formats a scalar as `p/q` in lowest terms, denominator always present.
pub fn format_scalar(x: &Scalar) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `p/q` or a plain integer `p`.
pub fn parse_scalar(s: &str) -> Result<Scalar, ParseScalarError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseScalarError::Empty);
    }
    let bad = || ParseScalarError::Malformed(s.to_string());
    match s.split_once('/') {
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Scalar::from_integer(n))
        }
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(ParseScalarError::ZeroDenominator(s.to_string()));
            }
            Ok(Scalar::new(p, q))
        }
    }
}

/// Scalar from an integer pair, for test and construction convenience.
pub fn ratio(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

/// Scalar from an integer.
pub fn int(p: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(p))
}

/// Nearest f64; rationals stay well inside f64 range at this crate's scales.
pub fn to_f64(x: &Scalar) -> f64 {
    x.to_f64().expect("rational out of f64 range")
}

/// Exact rational value of a finite f64 (every finite f64 is dyadic).
pub fn from_f64_exact(x: f64) -> Option<Scalar> {
    Scalar::from_float(x)
}

/// True if `x` is strictly positive.
pub fn is_positive(x: &Scalar) -> bool {
    x.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_always_carries_denominator() {
        assert_eq!(format_scalar(&int(3)), "3/1");
        assert_eq!(format_scalar(&ratio(-4, 6)), "-2/3");
        assert_eq!(format_scalar(&Scalar::zero()), "0/1");
    }

    #[test]
    fn parse_accepts_both_forms_and_normalizes() {
        assert_eq!(parse_scalar("3").unwrap(), int(3));
        assert_eq!(parse_scalar("6/4").unwrap(), ratio(3, 2));
        assert_eq!(parse_scalar("-6/4").unwrap(), ratio(-3, 2));
        assert_eq!(parse_scalar(" 1/2 ").unwrap(), ratio(1, 2));
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("a/b").is_err());
        assert!(parse_scalar("").is_err());
    }

    #[test]
    fn f64_round_trip_is_exact_for_dyadics() {
        let x = from_f64_exact(0.140625).unwrap();
        assert_eq!(x, ratio(9, 64));
        assert_eq!(to_f64(&x), 0.140625);
    }
}
