//! Product rules `Dₓⁿ [g(u) h(u)]` for `u = x²` and `u = x³`, the Γ-operator,
//! and the closed form for the derivatives of `J₀(x)²`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;

use crate::derivative_rules::{
    cubic_rule, hermite_route_square, square_rule, DerivativeExpansion, Evaluation, InnerMap,
};
use crate::error::{Error, Result};
use crate::exact_arith::{binomial, factorial, int, rpow, to_f64, Rational};
use crate::umbral_func::{bessel_j_value, UmbralFunction};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductExpansionTerm {
    pub coefficient: Rational,
    pub x_exponent: i64,
    pub g_order: u32,
    pub h_order: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductExpansion {
    pub order_n: u32,
    pub inner: InnerMap,
    /// Sorted by `(g_order, h_order, x_exponent)`.
    pub terms: Vec<ProductExpansionTerm>,
}

#[derive(Default)]
struct ProductCollector {
    map: BTreeMap<(u32, u32, i64), Rational>,
}

impl ProductCollector {
    fn add(&mut self, coefficient: Rational, x_exponent: i64, g_order: u32, h_order: u32) {
        if coefficient.is_zero() {
            return;
        }
        *self
            .map
            .entry((g_order, h_order, x_exponent))
            .or_insert_with(Rational::zero) += coefficient;
    }

    fn add_product(&mut self, weight: &Rational, left: &DerivativeExpansion, right: &DerivativeExpansion) {
        for l in &left.terms {
            for r in &right.terms {
                self.add(
                    weight * &l.coefficient * &r.coefficient,
                    l.x_exponent + r.x_exponent,
                    l.inner_order,
                    r.inner_order,
                );
            }
        }
    }

    fn finish(self, order_n: u32, inner: InnerMap) -> ProductExpansion {
        let terms = self
            .map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((g_order, h_order, x_exponent), coefficient)| ProductExpansionTerm {
                coefficient,
                x_exponent,
                g_order,
                h_order,
            })
            .collect();
        ProductExpansion { order_n, inner, terms }
    }
}

impl ProductExpansion {
    /// The expansion with `g` and `h` exchanged.
    pub fn swapped(&self) -> Self {
        let mut c = ProductCollector::default();
        for t in &self.terms {
            c.add(t.coefficient.clone(), t.x_exponent, t.h_order, t.g_order);
        }
        c.finish(self.order_n, self.inner)
    }

    /// Keeps the terms with `h_order = 0`, i.e. the product with `h ≡ 1`.
    pub fn degenerate(&self) -> DerivativeExpansion {
        let mut out = DerivativeExpansion::identity(self.inner);
        out.order_n = self.order_n;
        out.terms = self
            .terms
            .iter()
            .filter(|t| t.h_order == 0)
            .map(|t| crate::derivative_rules::ExpansionTerm {
                coefficient: t.coefficient.clone(),
                x_exponent: t.x_exponent,
                inner_order: t.g_order,
                extra_scale: Default::default(),
            })
            .collect();
        out.terms.sort_by_key(|a| (a.inner_order, a.x_exponent));
        out
    }
}

impl fmt::Display for ProductExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| format!("({})·x^{}·g^({})·h^({})", t.coefficient, t.x_exponent, t.g_order, t.h_order))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `Dₓⁿ [g(x²)h(x²)] = n! Σ_k (2x)^{n−2k}/((n−2k)! k!) Σⱼ C(n−k, j) g⁽ⁿ⁻ᵏ⁻ʲ⁾ h⁽ʲ⁾`.
pub fn leibniz_square(n: u32) -> ProductExpansion {
    let nf = factorial(n);
    let mut c = ProductCollector::default();
    for k in 0..=n / 2 {
        let p = n - 2 * k;
        let outer = rpow(&int(2), p as i64) * &nf / (factorial(p) * factorial(k));
        for j in 0..=n - k {
            c.add(&outer * binomial(n - k, j as i64), p as i64, n - k - j, j);
        }
    }
    c.finish(n, InnerMap::Square)
}

/// `Dₓⁿ [g(x³)h(x³)] = Σ_k C(n,k) Hₙ₋ₖ⁽³⁾(3x²γ̂, 3xγ̂, γ̂) Hₖ⁽³⁾(3x²η̂, 3xη̂, η̂)`.
pub fn leibniz_cubic(n: u32) -> ProductExpansion {
    let mut c = ProductCollector::default();
    for k in 0..=n {
        c.add_product(&binomial(n, k as i64), &cubic_rule(n - k), &cubic_rule(k));
    }
    c.finish(n, InnerMap::Cubic)
}

/// Pairs `(C(n,k), Dⁿ⁻ᵏ g(x²), Dᵏ h(x²))` in Hermite form.
pub fn split_form_square(n: u32) -> Vec<(Rational, DerivativeExpansion, DerivativeExpansion)> {
    (0..=n)
        .map(|k| (binomial(n, k as i64), hermite_route_square(n - k), hermite_route_square(k)))
        .collect()
}

/// Multiplies out and collects split-form pairs.
pub fn flatten_split_form(order_n: u32, pairs: &[(Rational, DerivativeExpansion, DerivativeExpansion)]) -> ProductExpansion {
    let mut c = ProductCollector::default();
    for (w, l, r) in pairs {
        c.add_product(w, l, r);
    }
    c.finish(order_n, InnerMap::Square)
}

/// Product rule by inner map; only `x²` and `x³` are supported.
pub fn product_rule(inner: InnerMap, n: u32) -> Result<ProductExpansion> {
    match inner {
        InnerMap::Square => Ok(leibniz_square(n)),
        InnerMap::Cubic => Ok(leibniz_cubic(n)),
        other => Err(Error::InvalidArgument(format!("no product rule for inner map {other}"))),
    }
}

/// `Σ c · x0^p · g⁽ⁱ⁾(u) h⁽ʲ⁾(u)`.
pub fn evaluate_product(e: &ProductExpansion, g: &UmbralFunction, h: &UmbralFunction, x0: f64) -> Result<Evaluation> {
    if x0 == 0.0 && e.terms.iter().any(|t| t.x_exponent < 0) {
        return Err(Error::Domain(format!("product expansion singular at x0 = {x0}")));
    }
    let u = e.inner.inner_value(x0, &BTreeMap::new())?;
    let mut g_cache: HashMap<u32, f64> = HashMap::new();
    let mut h_cache: HashMap<u32, f64> = HashMap::new();
    let mut value = 0.0;
    let mut term_scale = 0.0;
    for t in &e.terms {
        let gd = cached(&mut g_cache, g, t.g_order, u)?;
        let hd = cached(&mut h_cache, h, t.h_order, u)?;
        let term = to_f64(&t.coefficient) * x0.powi(t.x_exponent as i32) * gd * hd;
        value += term;
        term_scale += term.abs();
    }
    Ok(Evaluation { value, term_scale })
}

fn cached(cache: &mut HashMap<u32, f64>, f: &UmbralFunction, m: u32, u: f64) -> Result<f64> {
    if let Some(v) = cache.get(&m) {
        return Ok(*v);
    }
    let v = f.derivative_at(m, u)?;
    cache.insert(m, v);
    Ok(v)
}

/// `Dₓⁿ [J₀(x)²] = (−1)ⁿ n! Σ_k (−2x)^{−k}/((n−2k)! k!) Σ_m C(n−k, m) J_{n−k−m}(x) J_m(x)`.
pub fn bessel_j0_squared_derivative(n: u32, x0: f64) -> Result<f64> {
    if x0 == 0.0 && n >= 2 {
        return Err(Error::Domain(format!("order {n} derivative of J0² is singular in this form at x0 = 0")));
    }
    let j: Vec<f64> = (0..=n).map(|k| bessel_j_value(k, x0)).collect::<Result<_>>()?;
    let nf = to_f64(&factorial(n));
    let mut total = 0.0;
    for k in 0..=n / 2 {
        let mut inner = 0.0;
        for m in 0..=n - k {
            inner += to_f64(&binomial(n - k, m as i64)) * j[(n - k - m) as usize] * j[m as usize];
        }
        let weight = nf / (to_f64(&factorial(n - 2 * k)) * to_f64(&factorial(k)));
        total += weight * (-2.0 * x0).powi(-(k as i32)) * inner;
    }
    Ok(if n.is_multiple_of(2) { total } else { -total })
}

/// `n! Σ_k a^{n−2k} b^k / ((n−2k)! k!) · f⁽ⁿ⁻ᵏ⁾(x0²)`.
pub fn gamma_operator_apply(n: u32, a: f64, b: f64, f: &UmbralFunction, x0: f64) -> Result<f64> {
    let u = x0 * x0;
    let nf = to_f64(&factorial(n));
    let mut total = 0.0;
    for k in 0..=n / 2 {
        let weight = nf * a.powi((n - 2 * k) as i32) * b.powi(k as i32)
            / (to_f64(&factorial(n - 2 * k)) * to_f64(&factorial(k)));
        total += weight * f.derivative_at(n - k, u)?;
    }
    Ok(total)
}

/// The single-function rule a product rule degenerates to.
pub fn single_function_rule(inner: InnerMap, n: u32) -> Result<DerivativeExpansion> {
    match inner {
        InnerMap::Square => Ok(square_rule(n)),
        InnerMap::Cubic => Ok(cubic_rule(n)),
        other => Err(Error::InvalidArgument(format!("no product rule for inner map {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet_oracle::bessel_j0_squared_nth_derivative;
    use crate::umbral_func::{builtin, Builtin};
    use approx::assert_relative_eq;

    fn t(c: i64, x: i64, g: u32, h: u32) -> ProductExpansionTerm {
        ProductExpansionTerm { coefficient: int(c), x_exponent: x, g_order: g, h_order: h }
    }

    fn sorted(mut v: Vec<ProductExpansionTerm>) -> Vec<ProductExpansionTerm> {
        v.sort_by_key(|t| (t.g_order, t.h_order, t.x_exponent));
        v
    }

    #[test]
    fn leibniz_square_examples() {
        assert_eq!(leibniz_square(1).terms, sorted(vec![t(2, 1, 1, 0), t(2, 1, 0, 1)]));
        assert_eq!(
            leibniz_square(2).terms,
            sorted(vec![t(4, 2, 2, 0), t(8, 2, 1, 1), t(4, 2, 0, 2), t(2, 0, 1, 0), t(2, 0, 0, 1)])
        );
        assert_eq!(leibniz_square(0).terms, vec![t(1, 0, 0, 0)]);
    }

    #[test]
    fn leibniz_cubic_examples() {
        assert_eq!(leibniz_cubic(1).terms, sorted(vec![t(3, 2, 1, 0), t(3, 2, 0, 1)]));
        assert_eq!(
            leibniz_cubic(2).terms,
            sorted(vec![t(9, 4, 2, 0), t(18, 4, 1, 1), t(9, 4, 0, 2), t(6, 1, 1, 0), t(6, 1, 0, 1)])
        );
    }

    #[test]
    fn split_form_matches_direct_sum() {
        let pairs = split_form_square(0);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].0, int(1));
        assert_eq!(pairs[0].1, DerivativeExpansion::identity(InnerMap::Square));
        let pairs = split_form_square(2);
        let weights: Vec<Rational> = pairs.iter().map(|p| p.0.clone()).collect();
        assert_eq!(weights, vec![int(1), int(2), int(1)]);
        for n in 0..=12 {
            assert_eq!(flatten_split_form(n, &split_form_square(n)), leibniz_square(n), "n={n}");
        }
    }

    #[test]
    fn degenerate_products_and_symmetry() {
        for n in 0..=15 {
            assert_eq!(leibniz_square(n).degenerate(), square_rule(n), "square n={n}");
            assert_eq!(leibniz_cubic(n).degenerate(), cubic_rule(n), "cubic n={n}");
            assert_eq!(leibniz_square(n).swapped(), leibniz_square(n));
            assert_eq!(leibniz_cubic(n).swapped(), leibniz_cubic(n));
        }
    }

    #[test]
    fn gaussian_product_cancels() {
        let g = builtin(Builtin::Exp).unwrap();
        let h = builtin(Builtin::GaussianExp(-1.0)).unwrap();
        for n in 1..=8 {
            for x0 in [0.4, 1.0, 1.7] {
                let ev = evaluate_product(&leibniz_square(n), &g, &h, x0).unwrap();
                assert!(ev.value.abs() < 1e-9 * ev.term_scale.max(1.0), "n={n} x0={x0}: {ev:?}");
            }
        }
    }

    #[test]
    fn bessel_square_examples() {
        assert_eq!(bessel_j0_squared_derivative(0, 0.0).unwrap(), 1.0);
        let expected = -2.0 * 0.7651976865579666 * 0.44005058574493355;
        assert_relative_eq!(bessel_j0_squared_derivative(1, 1.0).unwrap(), expected, max_relative = 1e-13);
        assert!((expected + 0.6735).abs() < 1e-4);
        assert!(matches!(bessel_j0_squared_derivative(2, 0.0), Err(Error::Domain(_))));
        for x0 in [0.7, 1.0, 2.0] {
            for n in 0..=8 {
                let closed = bessel_j0_squared_derivative(n, x0).unwrap();
                let jet = bessel_j0_squared_nth_derivative(n as usize, x0).unwrap();
                assert_relative_eq!(closed, jet, max_relative = 1e-8, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn leibniz_square_reproduces_bessel_square() {
        let g = builtin(Builtin::BesselSquare).unwrap();
        let ev = evaluate_product(&leibniz_square(1), &g, &g, 1.0).unwrap();
        assert_relative_eq!(ev.value, bessel_j0_squared_derivative(1, 1.0).unwrap(), max_relative = 1e-12);
        for n in 2..=6 {
            let ev = evaluate_product(&leibniz_square(n), &g, &g, 1.3).unwrap();
            let jet = bessel_j0_squared_nth_derivative(n as usize, 1.3).unwrap();
            assert_relative_eq!(ev.value, jet, max_relative = 1e-8, epsilon = 1e-10);
        }
    }

    #[test]
    fn gamma_operator_examples() {
        let exp = builtin(Builtin::Exp).unwrap();
        let x0: f64 = 0.8;
        assert_relative_eq!(gamma_operator_apply(0, 3.0, -2.0, &exp, x0).unwrap(), (x0 * x0).exp());
        for (a, b) in [(1.5, 0.5), (-2.0, 3.0)] {
            assert_relative_eq!(
                gamma_operator_apply(2, a, b, &exp, x0).unwrap(),
                (a * a + 2.0 * b) * (x0 * x0).exp(),
                max_relative = 1e-14
            );
        }
        // Γ⁽¹⁾ with a = 2: 2 f′(x0²), the square rule at n = 1 without its x.
        let c0 = builtin(Builtin::Tricomi(0.0)).unwrap();
        let direct = crate::derivative_rules::evaluate_rule(InnerMap::Square, 1, &c0, x0, &BTreeMap::new()).unwrap();
        assert_relative_eq!(gamma_operator_apply(1, 2.0, 7.0, &c0, x0).unwrap(), direct / x0, max_relative = 1e-14);
        // Γ⁽ⁿ⁾(2x0, 1) is the square rule evaluated at x0.
        for n in 0..=8 {
            let direct = crate::derivative_rules::evaluate_rule(InnerMap::Square, n, &c0, x0, &BTreeMap::new()).unwrap();
            assert_relative_eq!(
                gamma_operator_apply(n, 2.0 * x0, 1.0, &c0, x0).unwrap(),
                direct,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn unsupported_inner_maps() {
        assert!(product_rule(InnerMap::Sqrt, 2).is_err());
        assert!(single_function_rule(InnerMap::Reciprocal, 2).is_err());
    }
}
