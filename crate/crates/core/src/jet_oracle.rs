//! Brute-force differentiation with truncated Taylor jets.
//!
//! A jet holds the Taylor coefficients of a function around a center. Sums
//! and products truncate exactly, and composition `f ∘ g` is assembled by
//! Horner's scheme from the outer derivatives `f⁽ᵐ⁾(g₀)/m!`, so nothing here
//! depends on the closed forms it is used to check.

use std::collections::BTreeMap;

use crate::derivative_rules::InnerMap;
use crate::error::{Error, Result};
use crate::series::{self, from_i64, Scalar};
use crate::umbral_func::{builtin, Builtin, UmbralFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorJet<T = f64> {
    pub center: T,
    /// Coefficients of `(x − center)ʲ`, `j = 0..=order`.
    pub coefficients: Vec<T>,
}

impl<T: Scalar> TaylorJet<T> {
    /// The identity function `x` around `center`.
    pub fn var(center: T, order: usize) -> Self {
        let mut coefficients = vec![T::zero(); order + 1];
        coefficients[0] = center.clone();
        if order >= 1 {
            coefficients[1] = T::one();
        }
        TaylorJet { center, coefficients }
    }

    pub fn constant(center: T, value: T, order: usize) -> Self {
        let mut coefficients = vec![T::zero(); order + 1];
        coefficients[0] = value;
        TaylorJet { center, coefficients }
    }

    pub fn from_coefficients(center: T, coefficients: Vec<T>) -> Self {
        assert!(!coefficients.is_empty(), "a jet needs at least one coefficient");
        TaylorJet { center, coefficients }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn value(&self) -> T {
        self.coefficients[0].clone()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.center != other.center || self.order() != other.order() {
            return Err(Error::InvalidArgument(format!(
                "jet mismatch: center {:?}/order {} vs center {:?}/order {}",
                self.center,
                self.order(),
                other.center,
                other.order()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coefficients = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Ok(TaylorJet { center: self.center.clone(), coefficients })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-T::one()))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(TaylorJet {
            center: self.center.clone(),
            coefficients: series::mul(&self.coefficients, &other.coefficients, self.coefficients.len()),
        })
    }

    pub fn scale(&self, factor: &T) -> Self {
        TaylorJet {
            center: self.center.clone(),
            coefficients: self.coefficients.iter().map(|c| c.clone() * factor.clone()).collect(),
        }
    }

    pub fn add_constant(&self, value: &T) -> Self {
        let mut out = self.clone();
        out.coefficients[0] = out.coefficients[0].clone() + value.clone();
        out
    }

    pub fn powi(&self, p: u32) -> Self {
        let mut acc = TaylorJet::constant(self.center.clone(), T::one(), self.order());
        for _ in 0..p {
            acc = acc.mul(self).expect("same jet");
        }
        acc
    }

    pub fn recip(&self) -> Result<Self> {
        Ok(TaylorJet {
            center: self.center.clone(),
            coefficients: series::recip(&self.coefficients)?,
        })
    }

    /// Jet of the derivative, one order shorter.
    pub fn derivative_jet(&self) -> Self {
        let coefficients: Vec<T> = if self.order() == 0 {
            vec![T::zero()]
        } else {
            (1..self.coefficients.len())
                .map(|j| from_i64::<T>(j as i64) * self.coefficients[j].clone())
                .collect()
        };
        TaylorJet { center: self.center.clone(), coefficients }
    }

    /// Truncates to a lower order.
    pub fn truncate(&self, order: usize) -> Self {
        TaylorJet {
            center: self.center.clone(),
            coefficients: self.coefficients[..=order.min(self.order())].to_vec(),
        }
    }

    /// `Dⁿ F(center) = n! · cₙ`.
    pub fn derivative(&self, n: usize) -> T {
        let c = self.coefficients.get(n).cloned().unwrap_or_else(T::zero);
        (1..=n as i64).fold(c, |acc, k| acc * from_i64::<T>(k))
    }

    /// `Σ_m outer[m]·(g − g₀)ᵐ` by Horner's scheme.
    pub fn compose_series(&self, outer: &[T]) -> Self {
        let order = self.order();
        let mut shifted = self.clone();
        shifted.coefficients[0] = T::zero();
        let mut acc = TaylorJet::constant(self.center.clone(), T::zero(), order);
        for a in outer.iter().take(order + 1).rev() {
            acc = acc.mul(&shifted).expect("same jet").add_constant(a);
        }
        acc
    }
}

pub fn jet_var(center: f64, order: usize) -> TaylorJet {
    TaylorJet::var(center, order)
}

pub fn jet_mul(p: &TaylorJet, q: &TaylorJet) -> Result<TaylorJet> {
    p.mul(q)
}

/// Jet of `x ↦ f(g(x))` from the outer derivatives at `g₀`.
pub fn jet_compose_umbral(f: &UmbralFunction, g: &TaylorJet) -> Result<TaylorJet> {
    let g0 = g.value();
    let mut outer = Vec::with_capacity(g.order() + 1);
    let mut inv_fact = 1.0;
    for m in 0..=g.order() {
        if m > 0 {
            inv_fact /= m as f64;
        }
        outer.push(f.derivative_at(m as u32, g0)? * inv_fact);
    }
    Ok(g.compose_series(&outer))
}

/// Binomial coefficient `C(r, j)` for real `r`.
fn real_binomial(r: f64, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (r - i as f64) / (i as f64 + 1.0))
}

/// Jet of the inner map `u(x)` around `x0`.
pub fn inner_jet(inner: InnerMap, params: &BTreeMap<String, f64>, x0: f64, order: usize) -> Result<TaylorJet> {
    let x = jet_var(x0, order);
    let get = |name: &str| {
        params
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingParameter(name.to_string()))
    };
    match inner {
        InnerMap::Square => Ok(x.powi(2)),
        InnerMap::Cubic => Ok(x.powi(3)),
        InnerMap::Power(m) => Ok(x.powi(m)),
        InnerMap::QuadPoly => {
            let (a, b) = (get("a")?, get("b")?);
            x.powi(2).scale(&a).add(&x.scale(&b))
        }
        InnerMap::Sqrt => {
            if x0 <= 0.0 {
                return Err(Error::Domain(format!("√x is not expandable at x0 = {x0}")));
            }
            // √(x0 + h) = √x0 Σ C(1/2, j) (h/x0)ʲ
            let root = x0.sqrt();
            let coefficients = (0..=order)
                .map(|j| root * real_binomial(0.5, j) * x0.powi(-(j as i32)))
                .collect();
            Ok(TaylorJet::from_coefficients(x0, coefficients))
        }
        InnerMap::Reciprocal => {
            if x0 == 0.0 {
                return Err(Error::Domain("1/x is not expandable at x0 = 0".into()));
            }
            // 1/(x0 + h) = Σ (−1)ʲ hʲ / x0^{j+1}
            let coefficients = (0..=order)
                .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } * x0.powi(-(j as i32) - 1))
                .collect();
            Ok(TaylorJet::from_coefficients(x0, coefficients))
        }
    }
}

/// `Dₓⁿ f(u(x))` at `x0`, computed from jets only.
pub fn nth_derivative(
    f: &UmbralFunction,
    inner: InnerMap,
    params: &BTreeMap<String, f64>,
    n: usize,
    x0: f64,
) -> Result<f64> {
    let g = inner_jet(inner, params, x0, n)?;
    Ok(jet_compose_umbral(f, &g)?.derivative(n))
}

/// `Dₓⁿ [g(u(x)) h(u(x))]` at `x0`, computed from jets only.
pub fn nth_derivative_product(
    g: &UmbralFunction,
    h: &UmbralFunction,
    inner: InnerMap,
    params: &BTreeMap<String, f64>,
    n: usize,
    x0: f64,
) -> Result<f64> {
    let u = inner_jet(inner, params, x0, n)?;
    let product = jet_compose_umbral(g, &u)?.mul(&jet_compose_umbral(h, &u)?)?;
    Ok(product.derivative(n))
}

/// Jet of `J₀(x) = C₀(x²/4)` around `x0`.
pub fn bessel_j0_jet(x0: f64, order: usize) -> Result<TaylorJet> {
    let quarter_square = jet_var(x0, order).powi(2).scale(&0.25);
    jet_compose_umbral(&builtin(Builtin::Tricomi(0.0))?, &quarter_square)
}

/// `Dₓⁿ [J₀(x)²]` at `x0` from the jet of the Bessel series.
pub fn bessel_j0_squared_nth_derivative(n: usize, x0: f64) -> Result<f64> {
    let j0 = bessel_j0_jet(x0, n)?;
    Ok(j0.mul(&j0)?.derivative(n))
}
