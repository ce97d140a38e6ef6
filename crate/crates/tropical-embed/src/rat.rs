//! Small exact-rational helpers: canonical `"p/q"` strings, decimal
//! enclosure parsing, power-of-two scales, and integer square-root bounds.
//!
//! Nothing here ever rounds through floating point.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Shorthand for small rational constants in code and tests.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Canonical string form: lowest terms, positive denominator, bare
/// integer when the denominator is one. `BigRational` already stores
/// lowest terms with positive denominator, so this is direct.
pub fn format_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `"p"` or `"p/q"` with optional leading sign. Rejects empty
/// parts, zero denominators, and any other shape.
pub fn parse_rat(s: &str) -> Result<BigRational> {
    let bad = |why: &str| Error::Parse {
        message: format!("invalid rational {s:?}: {why}"),
    };
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let numer: BigInt = num_str.trim().parse().map_err(|_| bad("bad numerator"))?;
    let denom: BigInt = match den_str {
        Some(d) => d.trim().parse().map_err(|_| bad("bad denominator"))?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(BigRational::new(numer, denom))
}

/// Parse a plain decimal literal such as `"-0.25"` or `"1.41421356"`.
/// Returns the exact rational midpoint and the number of fractional
/// digits (the enclosure precision).
pub fn parse_decimal(s: &str) -> Result<(BigRational, u32)> {
    let bad = |why: &str| Error::Parse {
        message: format!("invalid decimal {s:?}: {why}"),
    };
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if frac_part.contains(['+', '-', '.']) {
        return Err(bad("malformed fraction"));
    }
    let digits = frac_part.len() as u32;
    let joined = format!("{int_part}{frac_part}");
    let scaled: BigInt = joined.parse().map_err(|_| bad("not a number"))?;
    let denom = BigInt::from(10u32).pow(digits);
    Ok((BigRational::new(scaled, denom), digits))
}

/// Largest power of two `2^k` (k possibly negative) strictly below the
/// positive bound. Used wherever a canonical "nice" scale factor is
/// needed; powers of two keep denominators short.
pub fn pow2_below(bound: &BigRational) -> BigRational {
    assert!(bound.is_positive(), "pow2_below needs a positive bound");
    let one = BigRational::one();
    let two = BigRational::from(BigInt::from(2));
    let mut p = one.clone();
    if p < *bound {
        // Grow while the next power still fits.
        loop {
            let next = &p * &two;
            if next < *bound {
                p = next;
            } else {
                return p;
            }
        }
    }
    // Shrink until strictly below.
    while p >= *bound {
        p /= &two;
    }
    p
}

/// Smallest integer `s >= 0` with `s^2 >= n`. A conservative upper bound
/// for the Euclidean norm `sqrt(n)` of an integer vector.
pub fn ceil_sqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "ceil_sqrt of a negative number");
    let floor = n.sqrt();
    if &(&floor * &floor) == n {
        floor
    } else {
        floor + 1
    }
}

/// Deterministic decimal rendering with `places` fractional digits,
/// rounding to nearest (ties away from zero), trailing zeros trimmed.
/// Only used for SVG output; all certified math stays rational.
pub fn decimal_approx(r: &BigRational, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = r * BigRational::from(scale.clone());
    let (num, den) = (scaled.numer().clone(), scaled.denom().clone());
    let two_rem_num = BigInt::from(2) * (num.mod_floor(&den));
    let mut q = num.div_floor(&den);
    // Round half away from zero on the floor-divided remainder.
    if two_rem_num >= den {
        q += 1;
    }
    let neg = q.is_negative();
    let q_abs = q.abs();
    let (int_part, frac_part) = q_abs.div_rem(&scale);
    let mut frac_str = format!("{:0>width$}", frac_part.to_string(), width = places as usize);
    while frac_str.ends_with('0') {
        frac_str.pop();
    }
    let sign = if neg && (!int_part.is_zero() || !frac_str.is_empty()) {
        "-"
    } else {
        ""
    };
    if frac_str.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_str}")
    }
}

/// Exact conversion to f64 is impossible in general; this gives the
/// nearest double for viewport sizing only.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_rational_strings() {
        assert_eq!(format_rat(&rat(4, 2)), "2");
        assert_eq!(format_rat(&rat(-3, 9)), "-1/3");
        assert_eq!(format_rat(&rat(0, 5)), "0");
        assert_eq!(parse_rat("10/3").unwrap(), rat(10, 3));
        assert_eq!(parse_rat("-7").unwrap(), rat(-7, 1));
        assert_eq!(parse_rat("6/-4").unwrap(), rat(-3, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("a/b").is_err());
        assert!(parse_rat("").is_err());
    }

    #[test]
    fn decimal_enclosures() {
        let (mid, digits) = parse_decimal("1.25").unwrap();
        assert_eq!(mid, rat(5, 4));
        assert_eq!(digits, 2);
        let (mid, digits) = parse_decimal("-0.5").unwrap();
        assert_eq!(mid, rat(-1, 2));
        assert_eq!(digits, 1);
        let (mid, digits) = parse_decimal("3").unwrap();
        assert_eq!(mid, rat(3, 1));
        assert_eq!(digits, 0);
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal("1.-2").is_err());
    }

    #[test]
    fn power_of_two_scales() {
        assert_eq!(pow2_below(&rat(1, 3)), rat(1, 4));
        assert_eq!(pow2_below(&rat(1, 4)), rat(1, 8));
        assert_eq!(pow2_below(&rat(3, 1)), rat(2, 1));
        assert_eq!(pow2_below(&rat(1, 1)), rat(1, 2));
        assert_eq!(pow2_below(&rat(5, 4)), rat(1, 1));
    }

    #[test]
    fn integer_sqrt_upper_bound() {
        assert_eq!(ceil_sqrt(&BigInt::from(0)), BigInt::from(0));
        assert_eq!(ceil_sqrt(&BigInt::from(1)), BigInt::from(1));
        assert_eq!(ceil_sqrt(&BigInt::from(2)), BigInt::from(2));
        assert_eq!(ceil_sqrt(&BigInt::from(4)), BigInt::from(2));
        assert_eq!(ceil_sqrt(&BigInt::from(5)), BigInt::from(3));
    }

    #[test]
    fn decimal_rendering_is_deterministic() {
        assert_eq!(decimal_approx(&rat(1, 3), 4), "0.3333");
        assert_eq!(decimal_approx(&rat(-1, 2), 4), "-0.5");
        assert_eq!(decimal_approx(&rat(2, 1), 4), "2");
        assert_eq!(decimal_approx(&rat(1, 16), 2), "0.06");
        assert_eq!(decimal_approx(&rat(-1, 1600), 2), "0");
    }
}
