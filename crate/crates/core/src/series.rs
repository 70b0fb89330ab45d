//! Truncated power-series operations over any [`Scalar`] coefficient field.
//!
//! A series is a coefficient slice `[c₀, c₁, …, c_N]` for `Σ cⱼ tʲ`; every
//! operation returns a result truncated to the input length.

use std::fmt::Debug;
use std::ops::Neg;

use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};

/// Coefficient field for series and jets: `f64` or exact [`crate::Rational`].
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> + FromPrimitive {}

impl<T> Scalar for T where T: Clone + Debug + PartialEq + Num + Neg<Output = T> + FromPrimitive {}

pub(crate) fn from_i64<T: Scalar>(n: i64) -> T {
    T::from_i64(n).expect("integer is representable in every scalar field")
}

/// Cauchy product truncated at `len` coefficients.
pub fn mul<T: Scalar>(a: &[T], b: &[T], len: usize) -> Vec<T> {
    (0..len)
        .map(|n| {
            let mut acc = T::zero();
            for j in 0..=n {
                if let (Some(x), Some(y)) = (a.get(j), b.get(n - j)) {
                    acc = acc + x.clone() * y.clone();
                }
            }
            acc
        })
        .collect()
}

/// `exp(p)` for a series with zero constant term, via `n·gₙ = Σⱼ j·pⱼ·g_{n−j}`.
pub fn exp<T: Scalar>(p: &[T]) -> Result<Vec<T>> {
    if p.is_empty() {
        return Ok(Vec::new());
    }
    if !p[0].is_zero() {
        return Err(Error::InvalidArgument(
            "series exponential needs a zero constant term".into(),
        ));
    }
    let mut g = vec![T::one()];
    for n in 1..p.len() {
        let mut acc = T::zero();
        for j in 1..=n {
            acc = acc + from_i64::<T>(j as i64) * p[j].clone() * g[n - j].clone();
        }
        g.push(acc / from_i64(n as i64));
    }
    Ok(g)
}

/// `√p` for a series with constant term 1.
pub fn sqrt<T: Scalar>(p: &[T]) -> Result<Vec<T>> {
    if p.is_empty() {
        return Ok(Vec::new());
    }
    if !p[0].is_one() {
        return Err(Error::InvalidArgument(
            "series square root needs constant term 1".into(),
        ));
    }
    let mut q = vec![T::one()];
    for n in 1..p.len() {
        let mut acc = p[n].clone();
        for j in 1..n {
            acc = acc - q[j].clone() * q[n - j].clone();
        }
        q.push(acc / from_i64(2));
    }
    Ok(q)
}

/// `1/p` for a series with nonzero constant term.
pub fn recip<T: Scalar>(p: &[T]) -> Result<Vec<T>> {
    if p.is_empty() {
        return Ok(Vec::new());
    }
    if p[0].is_zero() {
        return Err(Error::InvalidArgument(
            "series reciprocal needs a nonzero constant term".into(),
        ));
    }
    let inv0 = T::one() / p[0].clone();
    let mut r = vec![inv0.clone()];
    for n in 1..p.len() {
        let mut acc = T::zero();
        for j in 1..=n {
            acc = acc + p[j].clone() * r[n - j].clone();
        }
        r.push(-(acc * inv0.clone()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{factorial, int, ratio, Rational};

    #[test]
    fn exp_of_t_is_reciprocal_factorials() {
        let p = vec![int(0), int(1), int(0), int(0), int(0), int(0)];
        let g = exp(&p).unwrap();
        for (n, c) in g.iter().enumerate() {
            assert_eq!(*c, factorial(n as u32).recip());
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let p = vec![int(1), ratio(-2, 3), ratio(5, 7), int(0), int(4)];
        let q = sqrt(&p).unwrap();
        assert_eq!(mul(&q, &q, p.len()), p);
    }

    #[test]
    fn recip_times_original_is_one() {
        let p = vec![ratio(3, 2), int(-1), ratio(1, 5), int(2)];
        let r = recip(&p).unwrap();
        let prod = mul(&p, &r, 4);
        assert_eq!(prod, vec![int(1), int(0), int(0), int(0)]);
    }

    #[test]
    fn rejects_bad_constant_terms() {
        assert!(exp(&[int(1), int(1)]).is_err());
        assert!(sqrt(&[int(2)]).is_err());
        assert!(recip::<Rational>(&[int(0), int(1)]).is_err());
        assert!(exp::<f64>(&[]).unwrap().is_empty());
    }

    #[test]
    fn float_exp_matches_closed_form() {
        // exp(2t) = Σ 2ⁿ tⁿ / n!
        let g = exp(&[0.0, 2.0, 0.0, 0.0, 0.0]).unwrap();
        let expected: [f64; 5] = [1.0, 2.0, 2.0, 4.0 / 3.0, 2.0 / 3.0];
        for (a, b) in g.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
