//! Exact rational arithmetic used for every utility, probability, and LP
//! coefficient in this crate. Nothing is ever rounded.

use num_bigint::BigInt;
pub use num_rational::BigRational as Rational;
use num_traits::{One, Signed, Zero};

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"a"` or `"a/b"` with optional sign. The denominator must be
/// nonzero; the result is reduced with a positive denominator.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty rational".to_string());
    }
    let parse_int = |part: &str| -> Result<BigInt, String> {
        part.trim()
            .parse::<BigInt>()
            .map_err(|_| format!("invalid integer `{part}`"))
    };
    match text.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(text)?)),
        Some((numer, denom)) => {
            let numer = parse_int(numer)?;
            let denom = parse_int(denom)?;
            if denom.is_zero() {
                return Err(format!("zero denominator in `{text}`"));
            }
            Ok(Rational::new(numer, denom))
        }
    }
}

/// Canonical text form: `"a"` for integers, `"a/b"` otherwise.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// True iff `value` lies in the closed interval `[lo, hi]`.
pub fn in_closed_interval(value: &Rational, lo: i64, hi: i64) -> bool {
    *value >= rat(lo) && *value <= rat(hi)
}

/// Sum of an iterator of rationals.
pub fn sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values.into_iter().fold(Rational::zero(), |acc, v| acc + v)
}

pub fn is_nonnegative(value: &Rational) -> bool {
    !value.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for text in ["0", "5", "-3", "1/2", "-7/3", "22/7"] {
            let value = parse_rational(text).unwrap();
            assert_eq!(format_rational(&value), text);
        }
    }

    #[test]
    fn parse_reduces_to_lowest_terms() {
        assert_eq!(parse_rational("2/4").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("6/-3").unwrap(), rat(-2));
        assert_eq!(format_rational(&parse_rational("4/-6").unwrap()), "-2/3");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("1.5").is_err());
    }

    #[test]
    fn integers_format_without_denominator() {
        assert_eq!(format_rational(&rat(5)), "5");
        assert_eq!(format_rational(&ratio(10, 2)), "5");
    }
}
