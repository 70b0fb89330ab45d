//! Closed-form expansions of `Dₓⁿ f(u(x))` for the supported inner maps.
//!
//! An expansion is a collected list of terms `c · b^p · (params) · f⁽ᵏ⁾(u(x))`
//! where `b` is the base symbol (`x`, or `√x` for the square-root rule, so
//! that half-powers of `x` stay integral) and `k` is the inner order.
//!
//! Every closed form is also reachable by [`recurrence_differentiate`], which
//! applies `d/dx` term by term with the product and chain rules. Equality of
//! `rule(n+1)` with `recurrence_differentiate(rule(n))` is the exact check on
//! each formula.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact_arith::{binomial, factorial, int, ratio, reciprocal_factorial, rpow, to_f64, Rational};
use crate::hkdf_poly::{h2, h3, hm};
use crate::umbral_func::UmbralFunction;

/// Exponents of the symbolic parameters (`a`, `b` of `ax² + bx`).
pub type ParamMonomial = BTreeMap<String, u32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseVariable {
    X,
    SqrtX,
    U,
}

impl BaseVariable {
    pub fn symbol(&self) -> &'static str {
        match self {
            BaseVariable::X => "x",
            BaseVariable::SqrtX => "sqrtx",
            BaseVariable::U => "u",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InnerMap {
    Square,
    Cubic,
    Power(u32),
    /// `a x² + b x` with `a`, `b` kept symbolic.
    QuadPoly,
    Sqrt,
    Reciprocal,
}

impl fmt::Display for InnerMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InnerMap::Square => write!(f, "square"),
            InnerMap::Cubic => write!(f, "cubic"),
            InnerMap::Power(m) => write!(f, "power({m})"),
            InnerMap::QuadPoly => write!(f, "quadpoly"),
            InnerMap::Sqrt => write!(f, "sqrt"),
            InnerMap::Reciprocal => write!(f, "reciprocal"),
        }
    }
}

impl std::str::FromStr for InnerMap {
    type Err = Error;

    /// Parses the display names, plus `power(m)` written as `powerM`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("unknown inner map {s:?}"));
        match s {
            "square" => Ok(InnerMap::Square),
            "cubic" => Ok(InnerMap::Cubic),
            "quadpoly" => Ok(InnerMap::QuadPoly),
            "sqrt" => Ok(InnerMap::Sqrt),
            "reciprocal" => Ok(InnerMap::Reciprocal),
            _ => {
                let m = s
                    .strip_prefix("power(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| s.strip_prefix("power"))
                    .ok_or_else(bad)?;
                let m: u32 = m.trim().parse().map_err(|_| bad())?;
                if m == 0 {
                    return Err(bad());
                }
                Ok(InnerMap::Power(m))
            }
        }
    }
}

/// One summand of `u′(x)` written in the base symbol.
struct SlopeTerm {
    coefficient: Rational,
    exponent: i64,
    params: ParamMonomial,
}

impl InnerMap {
    pub fn base(&self) -> BaseVariable {
        match self {
            InnerMap::Sqrt => BaseVariable::SqrtX,
            _ => BaseVariable::X,
        }
    }

    /// `db/dx = c · b^e` for the base symbol `b`.
    fn base_slope(&self) -> (Rational, i64) {
        match self.base() {
            BaseVariable::SqrtX => (ratio(1, 2), -1),
            _ => (int(1), 0),
        }
    }

    fn slope(&self) -> Vec<SlopeTerm> {
        let term = |c: Rational, e: i64| SlopeTerm {
            coefficient: c,
            exponent: e,
            params: ParamMonomial::new(),
        };
        match *self {
            InnerMap::Square => vec![term(int(2), 1)],
            InnerMap::Cubic => vec![term(int(3), 2)],
            InnerMap::Power(m) => vec![term(int(m as i64), m as i64 - 1)],
            InnerMap::QuadPoly => vec![
                SlopeTerm {
                    coefficient: int(2),
                    exponent: 1,
                    params: ParamMonomial::from([("a".to_string(), 1)]),
                },
                SlopeTerm {
                    coefficient: int(1),
                    exponent: 0,
                    params: ParamMonomial::from([("b".to_string(), 1)]),
                },
            ],
            InnerMap::Sqrt => vec![term(ratio(1, 2), -1)],
            InnerMap::Reciprocal => vec![term(int(-1), -2)],
        }
    }

    /// `u(x0)`, checking the domain of the map.
    pub fn inner_value(&self, x0: f64, params: &BTreeMap<String, f64>) -> Result<f64> {
        match *self {
            InnerMap::Square => Ok(x0 * x0),
            InnerMap::Cubic => Ok(x0 * x0 * x0),
            InnerMap::Power(m) => Ok(x0.powi(m as i32)),
            InnerMap::QuadPoly => {
                let a = param(params, "a")?;
                let b = param(params, "b")?;
                Ok(a * x0 * x0 + b * x0)
            }
            InnerMap::Sqrt => {
                if x0 <= 0.0 {
                    return Err(Error::Domain(format!("sqrt rule needs x0 > 0, got {x0}")));
                }
                Ok(x0.sqrt())
            }
            InnerMap::Reciprocal => {
                if x0 == 0.0 {
                    return Err(Error::Domain("reciprocal rule needs x0 ≠ 0".into()));
                }
                Ok(1.0 / x0)
            }
        }
    }

    fn base_value(&self, x0: f64) -> f64 {
        match self.base() {
            BaseVariable::SqrtX => x0.sqrt(),
            _ => x0,
        }
    }
}

fn param(params: &BTreeMap<String, f64>, name: &str) -> Result<f64> {
    params
        .get(name)
        .copied()
        .ok_or_else(|| Error::MissingParameter(name.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionTerm {
    pub coefficient: Rational,
    pub x_exponent: i64,
    pub inner_order: u32,
    pub extra_scale: ParamMonomial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivativeExpansion {
    pub order_n: u32,
    pub inner: InnerMap,
    pub base: BaseVariable,
    /// Sorted by `(inner_order, x_exponent, extra_scale)`, one term per key.
    pub terms: Vec<ExpansionTerm>,
}

type TermKey = (u32, i64, ParamMonomial);

/// Accumulates terms by key, dropping exact zeros.
#[derive(Debug, Default, Clone)]
pub(crate) struct Collector {
    map: BTreeMap<TermKey, Rational>,
}

impl Collector {
    pub(crate) fn add(&mut self, coefficient: Rational, x_exponent: i64, inner_order: u32, params: ParamMonomial) {
        if coefficient.is_zero() {
            return;
        }
        let entry = self
            .map
            .entry((inner_order, x_exponent, params))
            .or_insert_with(Rational::zero);
        *entry += coefficient;
    }

    pub(crate) fn into_expansion(self, order_n: u32, inner: InnerMap) -> DerivativeExpansion {
        let terms = self
            .map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((inner_order, x_exponent, extra_scale), coefficient)| ExpansionTerm {
                coefficient,
                x_exponent,
                inner_order,
                extra_scale,
            })
            .collect();
        DerivativeExpansion {
            order_n,
            inner,
            base: inner.base(),
            terms,
        }
    }
}

fn merge_params(a: &ParamMonomial, b: &ParamMonomial) -> ParamMonomial {
    let mut out = a.clone();
    for (k, v) in b {
        *out.entry(k.clone()).or_insert(0) += v;
    }
    out
}

impl DerivativeExpansion {
    /// The order-0 expansion `f(u(x))`.
    pub fn identity(inner: InnerMap) -> Self {
        let mut c = Collector::default();
        c.add(int(1), 0, 0, ParamMonomial::new());
        c.into_expansion(0, inner)
    }

    pub fn rule_name(&self) -> String {
        self.inner.to_string()
    }

    /// Substitutes numeric values for symbolic parameters and re-collects.
    pub fn specialize(&self, values: &BTreeMap<String, Rational>) -> Self {
        let mut c = Collector::default();
        for t in &self.terms {
            let mut coefficient = t.coefficient.clone();
            let mut rest = ParamMonomial::new();
            for (name, power) in &t.extra_scale {
                match values.get(name) {
                    Some(v) => coefficient *= rpow(v, *power as i64),
                    None => {
                        rest.insert(name.clone(), *power);
                    }
                }
            }
            c.add(coefficient, t.x_exponent, t.inner_order, rest);
        }
        c.into_expansion(self.order_n, self.inner)
    }

    pub fn max_inner_order(&self) -> u32 {
        self.terms.iter().map(|t| t.inner_order).max().unwrap_or(0)
    }
}

impl fmt::Display for DerivativeExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.base.symbol();
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                let params: String = t
                    .extra_scale
                    .iter()
                    .map(|(k, v)| if *v == 1 { format!("·{k}") } else { format!("·{k}^{v}") })
                    .collect();
                format!("({}){params}·{b}^{}·f^({})", t.coefficient, t.x_exponent, t.inner_order)
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `Dₓⁿ f(x²) = n! Σ_k (2x)^{n−2k} / (k! (n−2k)!) · f⁽ⁿ⁻ᵏ⁾(x²)`.
pub fn square_rule(n: u32) -> DerivativeExpansion {
    let nf = factorial(n);
    let mut c = Collector::default();
    for k in 0..=n / 2 {
        let j = n - 2 * k;
        let coeff = rpow(&int(2), j as i64) * &nf / (factorial(k) * factorial(j));
        c.add(coeff, j as i64, n - k, ParamMonomial::new());
    }
    c.into_expansion(n, InnerMap::Square)
}

/// The square rule read off `Hₙ⁽²⁾(2xφ̂, φ̂)`: powers of `φ̂` become inner orders.
pub fn hermite_route_square(n: u32) -> DerivativeExpansion {
    let mut c = Collector::default();
    for (e, coeff) in h2(n).terms {
        let (kx, ky) = (e[0], e[1]);
        c.add(coeff * rpow(&int(2), kx as i64), kx as i64, kx + ky, ParamMonomial::new());
    }
    c.into_expansion(n, InnerMap::Square)
}

/// `Dₓⁿ f(ax² + bx) = n! Σ_k (2ax + b)^{n−2k} a^k / ((n−2k)! k!) · f⁽ⁿ⁻ᵏ⁾`,
/// with `(2ax + b)^j` expanded binomially.
pub fn quadratic_poly_rule(n: u32) -> DerivativeExpansion {
    let nf = factorial(n);
    let mut c = Collector::default();
    for k in 0..=n / 2 {
        let j = n - 2 * k;
        let outer = &nf / (factorial(j) * factorial(k));
        for i in 0..=j {
            let coeff = &outer * binomial(j, i as i64) * rpow(&int(2), i as i64);
            let mut params = ParamMonomial::new();
            if i + k > 0 {
                params.insert("a".into(), i + k);
            }
            if j > i {
                params.insert("b".into(), j - i);
            }
            c.add(coeff, i as i64, n - k, params);
        }
    }
    c.into_expansion(n, InnerMap::QuadPoly)
}

/// `Dₓⁿ f(x³) = Hₙ⁽³⁾(3x²φ̂, 3xφ̂, φ̂) e^{x³φ̂}`.
pub fn cubic_rule(n: u32) -> DerivativeExpansion {
    let mut c = Collector::default();
    for (e, coeff) in h3(n).terms {
        let (k1, k2, k3) = (e[0], e[1], e[2]);
        let coeff = coeff * rpow(&int(3), (k1 + k2) as i64);
        c.add(coeff, (2 * k1 + k2) as i64, k1 + k2 + k3, ParamMonomial::new());
    }
    c.into_expansion(n, InnerMap::Cubic)
}

/// The cubic rule as the printed double sum
/// `n! Σ_k Σ_m (3x²)^{n−3k−m} x^{−m} / ((n−3k−2m)! k! m!) · f⁽ⁿ⁻²ᵏ⁻ᵐ⁾`.
pub fn cubic_rule_double_sum(n: u32) -> DerivativeExpansion {
    let nf = factorial(n);
    let mut c = Collector::default();
    for k in 0..=n / 3 {
        for m in 0..=(n - 3 * k) / 2 {
            let coeff = rpow(&int(3), (n - 3 * k - m) as i64) * &nf
                / (factorial(n - 3 * k - 2 * m) * factorial(k) * factorial(m));
            let x_exp = 2 * (n - 3 * k - m) as i64 - m as i64;
            c.add(coeff, x_exp, n - 2 * k - m, ParamMonomial::new());
        }
    }
    c.into_expansion(n, InnerMap::Cubic)
}

/// `Dₓⁿ f(xᵐ)` by substituting `ξⱼ = C(m,j) x^{m−j} φ̂` into `Hₙ⁽ᵐ⁾`.
pub fn power_rule(m: u32, n: u32) -> Result<DerivativeExpansion> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("power rule needs m ≥ 2, got {m}")));
    }
    let weights: Vec<Rational> = (1..=m).map(|j| binomial(m, j as i64)).collect();
    let mut c = Collector::default();
    for (e, coeff) in hm(m as usize, n)?.terms {
        let mut coeff = coeff;
        let mut x_exp = 0i64;
        let mut order = 0u32;
        for (idx, k) in e.iter().enumerate() {
            let j = idx as u32 + 1;
            coeff *= rpow(&weights[idx], *k as i64);
            x_exp += (m - j) as i64 * *k as i64;
            order += k;
        }
        c.add(coeff, x_exp, order, ParamMonomial::new());
    }
    Ok(c.into_expansion(n, InnerMap::Power(m)))
}

/// `Dₓⁿ f(xᵐ)` from the nested multi-index sum: the power of `_m z_j` runs up
/// to `ℓⱼ = (n − Σ_{i>j} i·k_i)/j`, the power of `_m z₁` is `ℓ₁`, and the
/// inner order is `ℓ₁ + Σ k_i`.
pub fn power_rule_nested_sum(m: u32, n: u32) -> Result<DerivativeExpansion> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("power rule needs m ≥ 2, got {m}")));
    }
    let mut c = Collector::default();
    let mut powers = vec![0u32; m as usize + 1];
    nested(m, m, n, n, &mut powers, &mut c);
    Ok(c.into_expansion(n, InnerMap::Power(m)))
}

fn nested(m: u32, j: u32, n: u32, remaining: u32, powers: &mut Vec<u32>, c: &mut Collector) {
    if j == 1 {
        powers[1] = remaining;
        let mut coeff = factorial(n);
        let mut x_exp = 0i64;
        let mut order = 0u32;
        for i in 1..=m {
            let k = powers[i as usize];
            // z_i = C(m, i) x^{m−i}
            coeff *= rpow(&binomial(m, i as i64), k as i64) / factorial(k);
            x_exp += (m - i) as i64 * k as i64;
            order += k;
        }
        c.add(coeff, x_exp, order, ParamMonomial::new());
        return;
    }
    for k in 0..=remaining / j {
        powers[j as usize] = k;
        nested(m, j - 1, n, remaining - j * k, powers, c);
    }
    powers[j as usize] = 0;
}

/// `Dₓⁿ f(√x) = Σ_{k<n} (−1)ᵏ (n+k−1)! / (k!(n−k−1)!) (2√x)^{−(n+k)} f⁽ⁿ⁻ᵏ⁾(√x)`, `n ≥ 1`.
pub fn sqrt_rule(n: u32) -> Result<DerivativeExpansion> {
    if n == 0 {
        return Err(Error::InvalidArgument("sqrt rule is defined for n ≥ 1".into()));
    }
    let mut c = Collector::default();
    for k in 0..n {
        let sign = if k % 2 == 0 { int(1) } else { int(-1) };
        let coeff = sign * factorial(n + k - 1)
            / (rpow(&int(2), (n + k) as i64) * factorial(k) * factorial(n - k - 1));
        c.add(coeff, -((n + k) as i64), n - k, ParamMonomial::new());
    }
    Ok(c.into_expansion(n, InnerMap::Sqrt))
}

/// `Dₓⁿ f(1/x) = (−1)ⁿ (n−1)! Σ_k C(n,k) x^{k−2n} / (n−k−1)! · f⁽ⁿ⁻ᵏ⁾(1/x)`, `n ≥ 1`.
pub fn reciprocal_rule(n: u32) -> Result<DerivativeExpansion> {
    if n == 0 {
        return Err(Error::InvalidArgument("reciprocal rule is defined for n ≥ 1".into()));
    }
    let sign = if n.is_multiple_of(2) { int(1) } else { int(-1) };
    let lead = sign * factorial(n - 1);
    let mut c = Collector::default();
    // k = n vanishes through 1/(−1)! = 0
    for k in 0..=n {
        let coeff = &lead * binomial(n, k as i64) * reciprocal_factorial(n as i64 - k as i64 - 1);
        c.add(coeff, k as i64 - 2 * n as i64, n - k, ParamMonomial::new());
    }
    Ok(c.into_expansion(n, InnerMap::Reciprocal))
}

/// The closed-form expansion for `inner` at order `n`.
///
/// Order 0 yields the identity for every map, including `sqrt` and
/// `reciprocal`, whose printed formulas start at `n = 1`.
pub fn rule(inner: InnerMap, n: u32) -> Result<DerivativeExpansion> {
    match inner {
        InnerMap::Square => Ok(square_rule(n)),
        InnerMap::Cubic => Ok(cubic_rule(n)),
        InnerMap::Power(m) => power_rule(m, n),
        InnerMap::QuadPoly => Ok(quadratic_poly_rule(n)),
        InnerMap::Sqrt if n == 0 => Ok(DerivativeExpansion::identity(inner)),
        InnerMap::Sqrt => sqrt_rule(n),
        InnerMap::Reciprocal if n == 0 => Ok(DerivativeExpansion::identity(inner)),
        InnerMap::Reciprocal => reciprocal_rule(n),
    }
}

/// Applies `d/dx` to every term `c·b^p·f⁽ᵏ⁾(u(x))`:
/// `c·p·b^{p−1}·b′·f⁽ᵏ⁾ + c·b^p·u′·f⁽ᵏ⁺¹⁾`, with `b′` and `u′` in the base symbol.
pub fn recurrence_differentiate(e: &DerivativeExpansion, inner: InnerMap) -> Result<DerivativeExpansion> {
    if e.inner != inner {
        return Err(Error::KindMismatch {
            expected: e.inner.to_string(),
            got: inner.to_string(),
        });
    }
    let (base_c, base_e) = inner.base_slope();
    let slope = inner.slope();
    let mut c = Collector::default();
    for t in &e.terms {
        if t.x_exponent != 0 {
            let coeff = &t.coefficient * int(t.x_exponent) * &base_c;
            c.add(coeff, t.x_exponent - 1 + base_e, t.inner_order, t.extra_scale.clone());
        }
        for s in &slope {
            c.add(
                &t.coefficient * &s.coefficient,
                t.x_exponent + s.exponent,
                t.inner_order + 1,
                merge_params(&t.extra_scale, &s.params),
            );
        }
    }
    Ok(c.into_expansion(e.order_n + 1, inner))
}

/// Value and the sum of absolute term values of an evaluated expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub term_scale: f64,
}

/// `Σ c · b(x0)^p · params · f⁽ᵏ⁾(u(x0))`.
pub fn evaluate_expansion(
    e: &DerivativeExpansion,
    f: &UmbralFunction,
    x0: f64,
    params: &BTreeMap<String, f64>,
) -> Result<f64> {
    Ok(evaluate_expansion_detailed(e, f, x0, params)?.value)
}

pub fn evaluate_expansion_detailed(
    e: &DerivativeExpansion,
    f: &UmbralFunction,
    x0: f64,
    params: &BTreeMap<String, f64>,
) -> Result<Evaluation> {
    let u = e.inner.inner_value(x0, params)?;
    let b = e.inner.base_value(x0);
    if b == 0.0 && e.terms.iter().any(|t| t.x_exponent < 0) {
        return Err(Error::Domain(format!(
            "{} expansion of order {} is singular at x0 = {x0}",
            e.inner, e.order_n
        )));
    }
    let mut derivatives: HashMap<u32, f64> = HashMap::new();
    let mut value = 0.0;
    let mut term_scale = 0.0;
    for t in &e.terms {
        let d = match derivatives.get(&t.inner_order) {
            Some(d) => *d,
            None => {
                let d = f.derivative_at(t.inner_order, u)?;
                derivatives.insert(t.inner_order, d);
                d
            }
        };
        let mut term = to_f64(&t.coefficient) * b.powi(t.x_exponent as i32) * d;
        for (name, power) in &t.extra_scale {
            term *= param(params, name)?.powi(*power as i32);
        }
        value += term;
        term_scale += term.abs();
    }
    Ok(Evaluation { value, term_scale })
}

/// `Dₓⁿ f(u(x))` at `x0` from the closed form; order 0 is `f(u(x0))`.
pub fn evaluate_rule(
    inner: InnerMap,
    n: u32,
    f: &UmbralFunction,
    x0: f64,
    params: &BTreeMap<String, f64>,
) -> Result<f64> {
    evaluate_expansion(&rule(inner, n)?, f, x0, params)
}

/// Symbolic parameter values as exact rationals, e.g. `a = 2, b = 3`.
pub fn quad_params(a: i64, b: i64) -> BTreeMap<String, Rational> {
    BTreeMap::from([("a".to_string(), int(a)), ("b".to_string(), int(b))])
}

/// A term with coefficient one, for building expected lists in tests and callers.
pub fn unit_term(x_exponent: i64, inner_order: u32) -> ExpansionTerm {
    ExpansionTerm {
        coefficient: Rational::one(),
        x_exponent,
        inner_order,
        extra_scale: ParamMonomial::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::umbral_func::{builtin, Builtin};
    use approx::assert_relative_eq;

    fn t(c: Rational, x: i64, d: u32) -> ExpansionTerm {
        ExpansionTerm {
            coefficient: c,
            ..unit_term(x, d)
        }
    }

    fn tp(c: i64, x: i64, d: u32, params: &[(&str, u32)]) -> ExpansionTerm {
        ExpansionTerm {
            coefficient: int(c),
            x_exponent: x,
            inner_order: d,
            extra_scale: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    fn sorted(mut terms: Vec<ExpansionTerm>) -> Vec<ExpansionTerm> {
        terms.sort_by(|a, b| {
            (a.inner_order, a.x_exponent, &a.extra_scale).cmp(&(b.inner_order, b.x_exponent, &b.extra_scale))
        });
        terms
    }

    #[test]
    fn square_rule_examples() {
        assert_eq!(square_rule(1).terms, vec![t(int(2), 1, 1)]);
        assert_eq!(square_rule(2).terms, sorted(vec![t(int(4), 2, 2), t(int(2), 0, 1)]));
        assert_eq!(
            square_rule(4).terms,
            sorted(vec![t(int(16), 4, 4), t(int(48), 2, 3), t(int(12), 0, 2)])
        );
        for n in 0..=20 {
            assert_eq!(square_rule(n).terms.len() as u32, n / 2 + 1);
        }
    }

    #[test]
    fn hermite_route_examples() {
        assert_eq!(hermite_route_square(0).terms, vec![t(int(1), 0, 0)]);
        assert_eq!(hermite_route_square(2), square_rule(2));
        assert_eq!(hermite_route_square(7), square_rule(7));
    }

    #[test]
    fn quadratic_poly_examples() {
        assert_eq!(
            quadratic_poly_rule(1).terms,
            sorted(vec![tp(2, 1, 1, &[("a", 1)]), tp(1, 0, 1, &[("b", 1)])])
        );
        assert_eq!(
            quadratic_poly_rule(2).terms,
            sorted(vec![
                tp(4, 2, 2, &[("a", 2)]),
                tp(4, 1, 2, &[("a", 1), ("b", 1)]),
                tp(1, 0, 2, &[("b", 2)]),
                tp(2, 0, 1, &[("a", 1)]),
            ])
        );
        let special = quadratic_poly_rule(2).specialize(&quad_params(1, 0));
        assert_eq!(special.terms, square_rule(2).terms);
    }

    #[test]
    fn cubic_rule_examples() {
        assert_eq!(cubic_rule(1).terms, vec![t(int(3), 2, 1)]);
        assert_eq!(cubic_rule(2).terms, sorted(vec![t(int(9), 4, 2), t(int(6), 1, 1)]));
        assert_eq!(
            cubic_rule(3).terms,
            sorted(vec![t(int(27), 6, 3), t(int(54), 3, 2), t(int(6), 0, 1)])
        );
        for n in 0..=20 {
            assert_eq!(cubic_rule(n), cubic_rule_double_sum(n), "n = {n}");
        }
    }

    #[test]
    fn power_rule_examples() {
        assert_eq!(power_rule(4, 1).unwrap().terms, vec![t(int(4), 3, 1)]);
        assert_eq!(power_rule(2, 6).unwrap().terms, square_rule(6).terms);
        assert_eq!(
            power_rule(4, 2).unwrap().terms,
            sorted(vec![t(int(16), 6, 2), t(int(12), 2, 1)])
        );
        assert!(power_rule(1, 3).is_err());
    }

    #[test]
    fn nested_sum_agrees_with_substitution() {
        for m in 2..=5 {
            for n in 0..=8 {
                assert_eq!(
                    power_rule_nested_sum(m, n).unwrap(),
                    power_rule(m, n).unwrap(),
                    "m={m} n={n}"
                );
            }
        }
    }

    #[test]
    fn sqrt_rule_examples() {
        assert_eq!(sqrt_rule(1).unwrap().terms, vec![t(ratio(1, 2), -1, 1)]);
        assert_eq!(
            sqrt_rule(2).unwrap().terms,
            sorted(vec![t(ratio(1, 4), -2, 2), t(ratio(-1, 4), -3, 1)])
        );
        assert_eq!(
            sqrt_rule(3).unwrap().terms,
            sorted(vec![t(ratio(1, 8), -3, 3), t(ratio(-3, 8), -4, 2), t(ratio(3, 8), -5, 1)])
        );
        assert_eq!(sqrt_rule(2).unwrap().base, BaseVariable::SqrtX);
        assert!(sqrt_rule(0).is_err());
    }

    #[test]
    fn reciprocal_rule_examples() {
        assert_eq!(reciprocal_rule(1).unwrap().terms, vec![t(int(-1), -2, 1)]);
        assert_eq!(
            reciprocal_rule(2).unwrap().terms,
            sorted(vec![t(int(1), -4, 2), t(int(2), -3, 1)])
        );
        assert_eq!(
            reciprocal_rule(3).unwrap().terms,
            sorted(vec![t(int(-1), -6, 3), t(int(-6), -5, 2), t(int(-6), -4, 1)])
        );
        for n in 1..=15 {
            assert!(reciprocal_rule(n).unwrap().terms.len() as u32 <= n);
        }
        assert!(reciprocal_rule(0).is_err());
    }

    #[test]
    fn recurrence_examples() {
        let d = recurrence_differentiate(&square_rule(1), InnerMap::Square).unwrap();
        assert_eq!(d, square_rule(2));
        let d = recurrence_differentiate(&reciprocal_rule(1).unwrap(), InnerMap::Reciprocal).unwrap();
        assert_eq!(d, reciprocal_rule(2).unwrap());
        let d = recurrence_differentiate(&sqrt_rule(2).unwrap(), InnerMap::Sqrt).unwrap();
        assert_eq!(d, sqrt_rule(3).unwrap());
        let from_identity =
            recurrence_differentiate(&DerivativeExpansion::identity(InnerMap::Sqrt), InnerMap::Sqrt).unwrap();
        assert_eq!(from_identity, sqrt_rule(1).unwrap());
        assert!(matches!(
            recurrence_differentiate(&square_rule(1), InnerMap::Cubic),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn recurrence_closure_symbolic_quadpoly() {
        for n in 0..=12 {
            let d = recurrence_differentiate(&quadratic_poly_rule(n), InnerMap::QuadPoly).unwrap();
            assert_eq!(d, quadratic_poly_rule(n + 1), "n = {n}");
        }
    }

    #[test]
    fn evaluation_examples() {
        let none = BTreeMap::new();
        let exp = builtin(Builtin::Exp).unwrap();
        assert_relative_eq!(evaluate_expansion(&square_rule(2), &exp, 0.0, &none).unwrap(), 2.0);
        let e = std::f64::consts::E;
        assert_relative_eq!(
            evaluate_expansion(&square_rule(3), &exp, 1.0, &none).unwrap(),
            20.0 * e,
            max_relative = 1e-14
        );
        let v = evaluate_expansion(&reciprocal_rule(1).unwrap(), &exp, 2.0, &none).unwrap();
        assert_relative_eq!(v, -(0.5f64).exp() / 4.0, max_relative = 1e-14);
        assert_relative_eq!(v, -0.41218031767503206, max_relative = 1e-12);
    }

    #[test]
    fn evaluation_errors() {
        let none = BTreeMap::new();
        let exp = builtin(Builtin::Exp).unwrap();
        assert!(matches!(
            evaluate_expansion(&sqrt_rule(2).unwrap(), &exp, 0.0, &none),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            evaluate_expansion(&reciprocal_rule(2).unwrap(), &exp, 0.0, &none),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            evaluate_expansion(&quadratic_poly_rule(2), &exp, 1.0, &none),
            Err(Error::MissingParameter(_))
        ));
        // n = 0 is the identity for the rules printed from n = 1
        let v = evaluate_rule(InnerMap::Sqrt, 0, &exp, 4.0, &none).unwrap();
        assert_relative_eq!(v, 2f64.exp(), max_relative = 1e-15);
    }

    #[test]
    fn gaussian_hermite_specialization() {
        let none = BTreeMap::new();
        for (a_num, a_den) in [(-1i64, 1i64), (1, 2)] {
            let a = a_num as f64 / a_den as f64;
            let f = builtin(Builtin::GaussianExp(a)).unwrap();
            for n in 0..=10 {
                for x0 in [0.3, 1.0, 2.5] {
                    let lhs = evaluate_expansion(&square_rule(n), &f, x0, &none).unwrap();
                    let x0r = crate::exact_arith::parse_rational(&x0.to_string()).unwrap();
                    let ar = ratio(a_num, a_den);
                    let h = h2(n).evaluate(&[int(2) * &ar * &x0r, ar.clone()]).unwrap();
                    let rhs = to_f64(&h) * (a * x0 * x0).exp();
                    assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
                }
            }
        }
    }
}
