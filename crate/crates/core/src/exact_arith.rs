//! Exact rational arithmetic and the combinatorial primitives used by every
//! expansion in the crate.
//!
//! [`Rational`] is `num_rational::BigRational`, which keeps values canonical
//! (positive denominator, reduced by the gcd) after every operation.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Integer = BigInt;
pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn factorial_int(n: u32) -> Integer {
    (2..=n as u64).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn factorial(n: u32) -> Rational {
    Rational::from_integer(factorial_int(n))
}

/// `1/n!`, with the reciprocal-Gamma convention `1/n! = 0` for negative `n`.
pub fn reciprocal_factorial(n: i64) -> Rational {
    if n < 0 {
        Rational::zero()
    } else {
        Rational::new(BigInt::one(), factorial_int(n as u32))
    }
}

/// `C(n, k)`; zero when `k` lies outside `0..=n`.
pub fn binomial(n: u32, k: i64) -> Rational {
    Rational::from_integer(binomial_int(n, k))
}

pub fn binomial_int(n: u32, k: i64) -> Integer {
    if k < 0 || k > n as i64 {
        return BigInt::zero();
    }
    let k = (k as u32).min(n - k as u32);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `n!! = n(n−2)(n−4)…`, with `(−1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> Result<Rational> {
    if n < -1 {
        return Err(Error::InvalidArgument(format!(
            "double factorial is undefined for {n}"
        )));
    }
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    Ok(Rational::from_integer(acc))
}

/// `base^exp` for any integer exponent. `0^0 = 1`; a negative power of zero panics.
pub fn rpow(base: &Rational, exp: i64) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp.unsigned_abs() {
        acc *= base;
    }
    if exp < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// Falling factorial `p (p−1) … (p−k+1)`.
pub fn falling_factorial(p: &Rational, k: u32) -> Rational {
    let mut acc = Rational::one();
    let mut term = p.clone();
    for _ in 0..k {
        acc *= &term;
        term -= Rational::one();
    }
    acc
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Numerator or denominator beyond f64 range: divide in log space.
        let sign = if r.is_negative() { -1.0 } else { 1.0 };
        let (n, d) = (r.numer().abs(), r.denom().clone());
        let shift = n.bits().max(d.bits()) as i64 - 900;
        let (n, d) = if shift > 0 {
            (n >> shift as usize, d >> shift as usize)
        } else {
            (n, d)
        };
        let nf = n.to_f64().unwrap_or(f64::INFINITY);
        let df = d.to_f64().unwrap_or(f64::INFINITY);
        sign * nf / df
    })
}

/// Parses `"p/q"`, integers, and finite decimals such as `"-0.25"` or `"1e-3"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    if let Ok(r) = Rational::from_str(text) {
        return Ok(r);
    }
    let bad = || Error::InvalidArgument(format!("cannot parse `{text}` as a rational"));
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (
            &text[..pos],
            text[pos + 1..].parse::<i64>().map_err(|_| bad())?,
        ),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{whole}{frac}");
    let numer = BigInt::from_str(if all_digits.is_empty() { "0" } else { &all_digits })
        .map_err(|_| bad())?;
    let value = Rational::from_integer(numer) * rpow(&int(10), exponent - frac.len() as i64);
    Ok(if negative { -value } else { value })
}

/// A value `q·(√π)^s` with `q` rational and `s ∈ {0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfIntegerGamma {
    pub rational_part: Rational,
    pub sqrt_pi_power: u8,
}

impl HalfIntegerGamma {
    pub fn rational(q: Rational) -> Self {
        HalfIntegerGamma {
            rational_part: q,
            sqrt_pi_power: 0,
        }
    }

    pub fn sqrt_pi(q: Rational) -> Self {
        HalfIntegerGamma {
            rational_part: q,
            sqrt_pi_power: 1,
        }
    }

    pub fn to_f64(&self) -> f64 {
        let q = to_f64(&self.rational_part);
        if self.sqrt_pi_power == 1 {
            q * std::f64::consts::PI.sqrt()
        } else {
            q
        }
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        HalfIntegerGamma {
            rational_part: &self.rational_part * factor,
            sqrt_pi_power: self.sqrt_pi_power,
        }
    }

    /// Product of two values; `None` when the result would carry `(√π)²`.
    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        let s = self.sqrt_pi_power + other.sqrt_pi_power;
        (s <= 1).then(|| HalfIntegerGamma {
            rational_part: &self.rational_part * &other.rational_part,
            sqrt_pi_power: s,
        })
    }

    /// Quotient `self / other`, defined when the `√π` powers do not go negative.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        if other.rational_part.is_zero() || other.sqrt_pi_power > self.sqrt_pi_power {
            return None;
        }
        Some(HalfIntegerGamma {
            rational_part: &self.rational_part / &other.rational_part,
            sqrt_pi_power: self.sqrt_pi_power - other.sqrt_pi_power,
        })
    }
}

impl fmt::Display for HalfIntegerGamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.sqrt_pi_power, self.rational_part.is_one()) {
            _ if self.rational_part.is_zero() => write!(f, "0"),
            (0, _) => write!(f, "{}", self.rational_part),
            (_, true) => write!(f, "√π"),
            _ => write!(f, "{}·√π", self.rational_part),
        }
    }
}

/// Exact `Γ(two_a / 2)` for `two_a ≥ 1`.
pub fn gamma_half_integer(two_a: i64) -> Result<HalfIntegerGamma> {
    if two_a <= 0 {
        return Err(Error::InvalidArgument(format!(
            "Γ({two_a}/2) is not supported: argument must be positive"
        )));
    }
    if two_a.is_even() {
        Ok(HalfIntegerGamma::rational(factorial((two_a / 2 - 1) as u32)))
    } else {
        // Γ(n + 1/2) = (2n−1)!!/2ⁿ · √π
        let n = (two_a - 1) / 2;
        let q = double_factorial(2 * n - 1)? / rpow(&int(2), n);
        Ok(HalfIntegerGamma::sqrt_pi(q))
    }
}
