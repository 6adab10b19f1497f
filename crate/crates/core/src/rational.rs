//! Exact rational helpers and float snapping.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RationalError {
    #[error("`{0}` is not a rational of the form num/den")]
    Syntax(String),
    #[error("`{0}` has a zero denominator")]
    ZeroDenominator(String),
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `num/den` or a bare integer. Signs are allowed on the numerator only.
pub fn parse_rational(s: &str) -> Result<Rational, RationalError> {
    let t = s.trim();
    let syntax = || RationalError::Syntax(s.to_string());
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let digits = |x: &str| !x.is_empty() && x.bytes().all(|b| b.is_ascii_digit());
    let unsigned = num.strip_prefix(['-', '+']).unwrap_or(num);
    if !digits(unsigned) || !digits(den) {
        return Err(syntax());
    }
    let n: BigInt = num.parse().map_err(|_| syntax())?;
    let d: BigInt = den.parse().map_err(|_| syntax())?;
    if d.is_zero() {
        return Err(RationalError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(n, d))
}

/// Canonical text: `n/d` in lowest terms, or `n` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// accepted only if it lies within `tol` of `x`.
pub fn rationalize(x: f64, max_den: u64, tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let negative = x < 0.0;
    let target = x.abs();
    let (mut h0, mut h1): (i128, i128) = (0, 1);
    let (mut k0, mut k1): (i128, i128) = (1, 0);
    let mut rest = target;
    let mut best: Option<(i128, i128)> = None;
    for _ in 0..64 {
        let a = rest.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max_den as i128 {
            // Largest semiconvergent that still fits.
            let t = (max_den as i128 - k0) / k1;
            if t > 0 {
                let (hs, ks) = (t * h1 + h0, t * k1 + k0);
                let err_s = (hs as f64 / ks as f64 - target).abs();
                let err_c = best.map_or(f64::INFINITY, |(h, k)| (h as f64 / k as f64 - target).abs());
                if err_s < err_c {
                    best = Some((hs, ks));
                }
            }
            break;
        }
        best = Some((h2, k2));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = rest - a as f64;
        if frac < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
    }
    let (h, k) = best?;
    if (h as f64 / k as f64 - target).abs() > tol {
        return None;
    }
    let r = Rational::new(BigInt::from(h), BigInt::from(k));
    Some(if negative { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/8").unwrap(), ratio(3, 8));
        assert_eq!(parse_rational(" 6/16 ").unwrap(), ratio(3, 8));
        assert_eq!(parse_rational("1").unwrap(), one());
        assert_eq!(parse_rational("-1/2").unwrap(), ratio(-1, 2));
        assert!(matches!(parse_rational("1/0"), Err(RationalError::ZeroDenominator(_))));
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/-2").is_err());
        assert!(parse_rational("").is_err());
        assert_eq!(format_rational(&ratio(2, 4)), "1/2");
        assert_eq!(format_rational(&int(3)), "3");
        assert_eq!(format_rational(&zero()), "0");
    }

    #[test]
    fn rationalize_snaps_closed_forms() {
        assert_eq!(rationalize(0.09, 1_000_000, 1e-9), Some(ratio(9, 100)));
        assert_eq!(rationalize(0.25 + 3e-12, 1_000_000, 1e-9), Some(ratio(1, 4)));
        assert_eq!(rationalize(1.0 / 3.0, 1_000_000, 1e-9), Some(ratio(1, 3)));
        assert_eq!(rationalize(27.0 / 200.0, 1_000_000, 1e-9), Some(ratio(27, 200)));
        assert_eq!(rationalize(0.0, 1_000_000, 1e-9), Some(zero()));
        assert_eq!(rationalize(1.0, 1_000_000, 1e-9), Some(one()));
        assert_eq!(rationalize(-0.5, 1_000_000, 1e-9), Some(ratio(-1, 2)));
    }

    #[test]
    fn rationalize_rejects_far_values() {
        assert_eq!(rationalize(0.3, 2, 1e-9), None);
        assert_eq!(rationalize(f64::NAN, 10, 1e-9), None);
        // 355/113 is the best fit below 1000 but misses π by ~2.7e-7.
        assert_eq!(rationalize(std::f64::consts::PI, 1000, 1e-9), None);
        assert_eq!(rationalize(std::f64::consts::PI, 1000, 1e-6), Some(ratio(355, 113)));
    }
}
