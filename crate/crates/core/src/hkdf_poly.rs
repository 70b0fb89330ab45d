//! Hermite–Kampé de Fériet polynomials `Hₙ⁽ᵐ⁾(ξ₁, …, ξ_m)`.
//!
//! These are the coefficients of the generating function
//! `exp(ξ₁t + ξ₂t² + … + ξ_m tᵐ) = Σ Hₙ⁽ᵐ⁾ tⁿ/n!`. A polynomial is stored as a
//! sparse map from exponent vectors `(k₁, …, k_m)` to nonzero rational
//! coefficients; every key satisfies the weight constraint `Σ i·kᵢ = n`.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact_arith::{binomial, factorial, rpow, Rational};
use crate::series;

pub type TermMap = BTreeMap<Vec<u32>, Rational>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HkdfPoly {
    pub num_variables: usize,
    pub degree: u32,
    pub terms: TermMap,
}

impl HkdfPoly {
    /// Weight `Σ i·kᵢ` of an exponent vector (variables are 1-indexed).
    pub fn weight(exponents: &[u32]) -> u32 {
        exponents
            .iter()
            .enumerate()
            .map(|(i, k)| (i as u32 + 1) * k)
            .sum()
    }

    pub fn is_isobaric(&self) -> bool {
        self.terms
            .keys()
            .all(|e| e.len() == self.num_variables && Self::weight(e) == self.degree)
    }

    pub fn evaluate(&self, args: &[Rational]) -> Result<Rational> {
        if args.len() != self.num_variables {
            return Err(Error::LengthMismatch {
                expected: self.num_variables,
                got: args.len(),
            });
        }
        Ok(evaluate_terms(&self.terms, args))
    }

    /// Partial derivative with respect to variable `var` (0-based), as a term map.
    pub fn partial(&self, var: usize) -> TermMap {
        let mut out = TermMap::new();
        for (e, c) in &self.terms {
            let k = e[var];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            *out.entry(e2).or_insert_with(Rational::zero) += c * Rational::from_integer(k.into());
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Variable names used for display: `x, y` when `m = 2`, `x1 … xm` otherwise.
    pub fn variable_names(&self) -> Vec<String> {
        if self.num_variables == 2 {
            vec!["x".into(), "y".into()]
        } else {
            (1..=self.num_variables).map(|i| format!("x{i}")).collect()
        }
    }

    pub fn to_expression(&self) -> String {
        format_terms(&self.terms, &self.variable_names())
    }
}

pub(crate) fn evaluate_terms(terms: &TermMap, args: &[Rational]) -> Rational {
    terms
        .iter()
        .map(|(e, c)| {
            e.iter()
                .zip(args)
                .fold(c.clone(), |acc, (k, a)| acc * rpow(a, *k as i64))
        })
        .fold(Rational::zero(), |acc, t| acc + t)
}

/// Renders a term map in descending key order, e.g. `x^3 + 6*x*y`.
pub(crate) fn format_terms(terms: &TermMap, names: &[String]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (e, c)) in terms.iter().rev().enumerate() {
        let negative = c < &Rational::zero();
        let magnitude = if negative { -c.clone() } else { c.clone() };
        match (i, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let factors: Vec<String> = e
            .iter()
            .zip(names)
            .filter(|(k, _)| **k > 0)
            .map(|(k, name)| {
                if *k == 1 {
                    name.clone()
                } else {
                    format!("{name}^{k}")
                }
            })
            .collect();
        if factors.is_empty() {
            out.push_str(&magnitude.to_string());
        } else {
            if !magnitude.is_one() {
                out.push_str(&magnitude.to_string());
                out.push('*');
            }
            out.push_str(&factors.join("*"));
        }
    }
    out
}

/// `Hₙ⁽²⁾(x, y) = n! Σ_k x^{n−2k} y^k / ((n−2k)! k!)`.
pub fn h2(n: u32) -> HkdfPoly {
    let nf = factorial(n);
    let terms = (0..=n / 2)
        .map(|k| {
            let c = &nf / (factorial(n - 2 * k) * factorial(k));
            (vec![n - 2 * k, k], c)
        })
        .collect();
    HkdfPoly {
        num_variables: 2,
        degree: n,
        terms,
    }
}

/// `Hₙ⁽³⁾(x₁, x₂, x₃) = n! Σ_k x₃^k H_{n−3k}⁽²⁾(x₁, x₂) / ((n−3k)! k!)`.
pub fn h3(n: u32) -> HkdfPoly {
    let nf = factorial(n);
    let mut terms = TermMap::new();
    for k in 0..=n / 3 {
        let scale = &nf / (factorial(n - 3 * k) * factorial(k));
        for (e, c) in h2(n - 3 * k).terms {
            terms.insert(vec![e[0], e[1], k], c * &scale);
        }
    }
    HkdfPoly {
        num_variables: 3,
        degree: n,
        terms,
    }
}

/// `Hₙ⁽ᵐ⁾` by the recursion lowering `m` by one, from `Hₙ⁽¹⁾(ξ₁) = ξ₁ⁿ`.
pub fn hm(m: usize, n: u32) -> Result<HkdfPoly> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "Hermite–Kampé de Fériet polynomials need m ≥ 2, got {m}"
        )));
    }
    let mut memo = HashMap::new();
    let terms = hm_terms(m, n, &mut memo);
    Ok(HkdfPoly {
        num_variables: m,
        degree: n,
        terms,
    })
}

fn hm_terms(m: usize, n: u32, memo: &mut HashMap<(usize, u32), TermMap>) -> TermMap {
    if let Some(t) = memo.get(&(m, n)) {
        return t.clone();
    }
    let terms = if m == 1 {
        TermMap::from([(vec![n], Rational::one())])
    } else {
        let nf = factorial(n);
        let mut terms = TermMap::new();
        let step = m as u32;
        for k in 0..=n / step {
            let rest = n - step * k;
            let scale = &nf / (factorial(rest) * factorial(k));
            for (e, c) in hm_terms(m - 1, rest, memo) {
                let mut e = e;
                e.push(k);
                terms.insert(e, c * &scale);
            }
        }
        terms
    };
    memo.insert((m, n), terms.clone());
    terms
}

/// Checks `Hₙ⁽ᵐ⁾(a1 + a2) = Σ_k C(n,k) H_{n−k}⁽ᵐ⁾(a1) H_k⁽ᵐ⁾(a2)` exactly.
pub fn addition_split_check(n: u32, a1: &[Rational], a2: &[Rational], m: usize) -> Result<bool> {
    for a in [a1, a2] {
        if a.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                got: a.len(),
            });
        }
    }
    let sum: Vec<Rational> = a1.iter().zip(a2).map(|(x, y)| x + y).collect();
    let lhs = hm(m, n)?.evaluate(&sum)?;
    let mut rhs = Rational::zero();
    for k in 0..=n {
        rhs += binomial(n, k as i64) * hm(m, n - k)?.evaluate(a1)? * hm(m, k)?.evaluate(a2)?;
    }
    Ok(lhs == rhs)
}

/// Taylor coefficients of `exp(Σ_{j=1..m} ξⱼ tʲ)` through `t^order`, by exact series exponentiation.
pub fn generating_function_coeffs(m: usize, order: usize, args: &[Rational]) -> Result<Vec<Rational>> {
    if args.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: args.len(),
        });
    }
    let mut p = vec![Rational::zero(); order + 1];
    for (j, xi) in args.iter().enumerate() {
        if j < order {
            p[j + 1] = xi.clone();
        }
    }
    series::exp(&p)
}
