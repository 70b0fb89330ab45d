//! Bessel polynomials, two-variable Laguerre polynomials and the generalized
//! Stirling numbers `S₂⁽ᵛ⁾(n, k)` for `ν ∈ {1, 1/2, −1}`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::derivative_rules::{Collector, DerivativeExpansion, InnerMap, ParamMonomial};
use crate::error::{Error, Result};
use crate::exact_arith::{binomial, factorial, falling_factorial, int, ratio, reciprocal_factorial, rpow, Rational};
use crate::hkdf_poly::{evaluate_terms, format_terms, TermMap};
use crate::series;

/// Polynomial in one or two variables with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPoly {
    pub num_variables: usize,
    pub terms: TermMap,
}

impl RationalPoly {
    fn from_terms(num_variables: usize, terms: TermMap) -> Self {
        let terms = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        RationalPoly { num_variables, terms }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms.get(exponents).cloned().unwrap_or_else(Rational::zero)
    }

    /// Dense coefficients of a univariate polynomial, lowest degree first.
    pub fn univariate_coefficients(&self) -> Vec<Rational> {
        assert_eq!(self.num_variables, 1);
        (0..=self.degree()).map(|k| self.coefficient(&[k])).collect()
    }

    pub fn evaluate(&self, args: &[Rational]) -> Result<Rational> {
        if args.len() != self.num_variables {
            return Err(Error::LengthMismatch { expected: self.num_variables, got: args.len() });
        }
        Ok(evaluate_terms(&self.terms, args))
    }

    pub fn to_expression(&self) -> String {
        let names: Vec<String> = ["x", "y"][..self.num_variables].iter().map(|s| s.to_string()).collect();
        format_terms(&self.terms, &names)
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_expression())
    }
}

/// `yₙ(x) = Σ_k (n+k)! / ((n−k)! k!) (x/2)ᵏ`, with `y₋₁ = 1`.
pub fn bessel_poly(n: i64) -> Result<RationalPoly> {
    if n < -1 {
        return Err(Error::InvalidArgument(format!("Bessel polynomial index {n} < −1")));
    }
    let mut terms = TermMap::new();
    if n == -1 {
        terms.insert(vec![0], int(1));
    } else {
        let n = n as u32;
        for k in 0..=n {
            let c = factorial(n + k) / (factorial(n - k) * factorial(k) * rpow(&int(2), k as i64));
            terms.insert(vec![k], c);
        }
    }
    Ok(RationalPoly::from_terms(1, terms))
}

/// `Lₙ(x, y) = n! Σ_k (−1)ᵏ xᵏ y^{n−k} / ((n−k)! (k!)²)`.
pub fn laguerre_2var(n: u32) -> RationalPoly {
    let nf = factorial(n);
    let mut terms = TermMap::new();
    for k in 0..=n {
        let sign = if k % 2 == 0 { int(1) } else { int(-1) };
        terms.insert(vec![k, n - k], sign * &nf / (factorial(n - k) * factorial(k) * factorial(k)));
    }
    RationalPoly::from_terms(2, terms)
}

/// The exponent `ν` of the operator `x^ν D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StirlingFamily {
    One,
    Half,
    MinusOne,
}

impl StirlingFamily {
    pub const ALL: [StirlingFamily; 3] = [StirlingFamily::One, StirlingFamily::Half, StirlingFamily::MinusOne];

    pub fn nu(&self) -> Rational {
        match self {
            StirlingFamily::One => int(1),
            StirlingFamily::Half => ratio(1, 2),
            StirlingFamily::MinusOne => int(-1),
        }
    }

    /// `k` range with possibly nonzero entries at row `n`.
    pub fn k_range(&self, n: u32) -> std::ops::RangeInclusive<u32> {
        match self {
            StirlingFamily::One => 0..=n,
            StirlingFamily::Half => 0..=n / 2,
            StirlingFamily::MinusOne => 0..=n.saturating_sub(1),
        }
    }

    /// `(x exponent, derivative order)` multiplying `S₂⁽ᵛ⁾(n, k)` in the normal-ordered form.
    pub fn term_shape(&self, n: u32, k: u32) -> (Rational, u32) {
        match self {
            StirlingFamily::One => (int(k as i64), k),
            StirlingFamily::Half => (ratio(n as i64 - 2 * k as i64, 2), n - k),
            StirlingFamily::MinusOne => (int(-(n as i64) - k as i64), n - k),
        }
    }
}

impl fmt::Display for StirlingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StirlingFamily::One => "1",
            StirlingFamily::Half => "1/2",
            StirlingFamily::MinusOne => "-1",
        })
    }
}

impl FromStr for StirlingFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(StirlingFamily::One),
            "1/2" | "0.5" | "half" => Ok(StirlingFamily::Half),
            "-1" => Ok(StirlingFamily::MinusOne),
            other => Err(Error::InvalidArgument(format!("unknown Stirling family {other:?}"))),
        }
    }
}

/// `S₂⁽ᵛ⁾(n, k)`; zero outside the family's `k` range.
pub fn stirling(family: StirlingFamily, n: u32, k: i64) -> Rational {
    if k < 0 || !family.k_range(n).contains(&(k as u32)) {
        return Rational::zero();
    }
    let k = k as u32;
    match family {
        StirlingFamily::One => {
            // k! S(n,k) = Σ_j (−1)^{k−j} C(k,j) jⁿ
            let mut acc = Rational::zero();
            for j in 0..=k {
                let sign = if (k - j).is_multiple_of(2) { int(1) } else { int(-1) };
                acc += sign * binomial(k, j as i64) * rpow(&int(j as i64), n as i64);
            }
            acc / factorial(k)
        }
        StirlingFamily::Half => factorial(n) / (rpow(&int(4), k as i64) * factorial(k) * factorial(n - 2 * k)),
        StirlingFamily::MinusOne => {
            if n == 0 {
                return int(1);
            }
            let sign = if k.is_multiple_of(2) { int(1) } else { int(-1) };
            sign * factorial(n + k - 1) / (rpow(&int(2), k as i64) * factorial(k) * factorial(n - k - 1))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StirlingTable {
    pub family: StirlingFamily,
    pub values: BTreeMap<(u32, u32), Rational>,
}

impl StirlingTable {
    pub fn build(family: StirlingFamily, n_max: u32) -> Self {
        let mut values = BTreeMap::new();
        for n in 0..=n_max {
            for k in family.k_range(n) {
                values.insert((n, k), stirling(family, n, k as i64));
            }
        }
        StirlingTable { family, values }
    }

    pub fn get(&self, n: u32, k: u32) -> Rational {
        self.values.get(&(n, k)).cloned().unwrap_or_else(Rational::zero)
    }
}

/// A normal-ordered differential operator `Σ c · x^a Dᵇ`, keyed by `(a, b)`.
pub type NormalOrdered = BTreeMap<(Rational, u32), Rational>;

/// `(x^a Dᵇ)(x^c Dᵉ) = Σⱼ C(b,j) c^{(j)} x^{a+c−j} D^{b−j+e}`.
pub fn compose_normal_ordered(left: &NormalOrdered, right: &NormalOrdered) -> NormalOrdered {
    let mut out = NormalOrdered::new();
    for ((a, b), cl) in left {
        for ((c, e), cr) in right {
            for j in 0..=*b {
                let w = binomial(*b, j as i64) * falling_factorial(c, j) * cl * cr;
                if w.is_zero() {
                    continue;
                }
                *out.entry((a + c - int(j as i64), b - j + e)).or_insert_with(Rational::zero) += w;
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// `(x^ν D)ⁿ` in normal order, by repeated composition.
pub fn normal_ordered_power(nu: &Rational, n: u32) -> NormalOrdered {
    let step = NormalOrdered::from([((nu.clone(), 1), int(1))]);
    let mut acc = NormalOrdered::from([((int(0), 0), int(1))]);
    for _ in 0..n {
        acc = compose_normal_ordered(&step, &acc);
    }
    acc
}

type Monomials = BTreeMap<Rational, Rational>;

fn push(m: &mut Monomials, exponent: Rational, c: Rational) {
    if !c.is_zero() {
        *m.entry(exponent).or_insert_with(Rational::zero) += c;
    }
}

/// Checks `(y^ν D_y)ⁿ y^p = Σ_k S₂⁽ᵛ⁾(n,k) · (normal-ordered term) y^p` exactly.
pub fn operator_expansion_check(family: StirlingFamily, n: u32, p: &Rational) -> bool {
    let nu = family.nu();
    let (mut c, mut q) = (int(1), p.clone());
    for _ in 0..n {
        c *= &q;
        q = q - int(1) + &nu;
    }
    let mut lhs = Monomials::new();
    push(&mut lhs, q, c);

    let mut rhs = Monomials::new();
    for k in family.k_range(n) {
        let (x_exp, order) = family.term_shape(n, k);
        let c = stirling(family, n, k as i64) * falling_factorial(p, order);
        push(&mut rhs, p - int(order as i64) + x_exp, c);
    }
    lhs.retain(|_, v| !v.is_zero());
    rhs.retain(|_, v| !v.is_zero());
    lhs == rhs
}

/// Coefficients `[t⁰..t^order]` of `exp((1 − √(1 − 2xt))/x)`.
pub fn bessel_poly_generating_series(order: usize, x: &Rational) -> Result<Vec<Rational>> {
    if x.is_zero() {
        return Err(Error::Domain("Bessel generating function needs x ≠ 0".into()));
    }
    let mut p = vec![Rational::zero(); order + 1];
    p[0] = int(1);
    if order >= 1 {
        p[1] = -int(2) * x;
    }
    let root = series::sqrt(&p)?;
    let argument: Vec<Rational> = root
        .iter()
        .enumerate()
        .map(|(j, r)| if j == 0 { Rational::zero() } else { -r / x })
        .collect();
    series::exp(&argument)
}

/// `Σ tⁿ/n! · y_{n−1}(x)` agrees with the exact series through `t^order`.
pub fn bessel_poly_genfunc_check(order: usize, x: &Rational) -> Result<bool> {
    let lhs = bessel_poly_generating_series(order, x)?;
    for (n, c) in lhs.iter().enumerate() {
        let y = bessel_poly(n as i64 - 1)?.evaluate(std::slice::from_ref(x))?;
        if *c != y / factorial(n as u32) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Coefficients of `exp(−xt/(1 − yt)) / (1 − yt)`.
pub fn laguerre_generating_series(order: usize, x: &Rational, y: &Rational) -> Vec<Rational> {
    let mut denom = vec![Rational::zero(); order + 1];
    denom[0] = int(1);
    if order >= 1 {
        denom[1] = -y.clone();
    }
    let inv = series::recip(&denom).expect("constant term is one");
    let mut t = vec![Rational::zero(); order + 1];
    if order >= 1 {
        t[1] = -x.clone();
    }
    let argument = series::mul(&t, &inv, order + 1);
    let e = series::exp(&argument).expect("zero constant term");
    series::mul(&e, &inv, order + 1)
}

/// `Σ tⁿ Lₙ(x, y)` agrees with the exact series through `t^order`.
pub fn laguerre_genfunc_check(order: usize, x: &Rational, y: &Rational) -> bool {
    let args = [x.clone(), y.clone()];
    laguerre_generating_series(order, x, y)
        .iter()
        .enumerate()
        .all(|(n, c)| *c == evaluate_terms(&laguerre_2var(n as u32).terms, &args))
}

/// The `√x` rule read off `(φ̂/(2√x))ⁿ y_{n−1}(−1/(√x φ̂))`.
pub fn sqrt_rule_from_bessel_poly(n: u32) -> Result<DerivativeExpansion> {
    if n == 0 {
        return Err(Error::InvalidArgument("sqrt rule is defined for n ≥ 1".into()));
    }
    let y = bessel_poly(n as i64 - 1)?;
    let scale = rpow(&int(2), n as i64).recip();
    let mut c = Collector::default();
    for (e, coeff) in &y.terms {
        let k = e[0];
        let sign = if k % 2 == 0 { int(1) } else { int(-1) };
        c.add(sign * coeff * &scale, -((n + k) as i64), n - k, ParamMonomial::new());
    }
    Ok(c.into_expansion(n, InnerMap::Sqrt))
}

/// The `1/x` rule as `n! [Lₙ(ξ²ĉ, −ξ) + ξ L_{n−1}(ξ²ĉ, −ξ)]` with `ξ = 1/x`, `ĉᵏ → f⁽ᵏ⁾`.
pub fn reciprocal_rule_from_laguerre(n: u32) -> Result<DerivativeExpansion> {
    if n == 0 {
        return Err(Error::InvalidArgument("reciprocal rule is defined for n ≥ 1".into()));
    }
    let nf = factorial(n);
    let mut c = Collector::default();
    // Lₘ(ξ²ĉ, −ξ): xᵏ y^{m−k} → (−1)^{m−k} ξ^{m+k} ĉᵏ
    let mut add_laguerre = |m: u32, extra_xi: i64| {
        for (e, coeff) in &laguerre_2var(m).terms {
            let (k, j) = (e[0], e[1]);
            let sign = if j % 2 == 0 { int(1) } else { int(-1) };
            let xi_power = (m + k) as i64 + extra_xi;
            c.add(sign * coeff * &nf, -xi_power, k, ParamMonomial::new());
        }
    };
    add_laguerre(n, 0);
    add_laguerre(n - 1, 1);
    Ok(c.into_expansion(n, InnerMap::Reciprocal))
}

/// The collected form `n!·(−1)ⁿ/n Σ_k C(n,k) ξ^{2n−k}/(n−k−1)! ĉ^{n−k}`.
pub fn reciprocal_rule_collected(n: u32) -> Result<DerivativeExpansion> {
    if n == 0 {
        return Err(Error::InvalidArgument("reciprocal rule is defined for n ≥ 1".into()));
    }
    let sign = if n.is_multiple_of(2) { int(1) } else { int(-1) };
    let lead = sign * factorial(n) / int(n as i64);
    let mut c = Collector::default();
    for k in 0..=n {
        let coeff = &lead * binomial(n, k as i64) * reciprocal_factorial(n as i64 - k as i64 - 1);
        c.add(coeff, k as i64 - 2 * n as i64, n - k, ParamMonomial::new());
    }
    Ok(c.into_expansion(n, InnerMap::Reciprocal))
}
