//! Python bindings for `repdiff`.
//!
//! Exact quantities cross the boundary as `fractions.Fraction`; rational
//! arguments may be given as `int`, `Fraction` or strings such as `"3/4"`.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use repdiff::cli::{full_matrix, run_verify, RuleSpec, VerifyCase};
use repdiff::derivative_rules::{evaluate_expansion_detailed, recurrence_differentiate, rule, InnerMap};
use repdiff::exact_arith::{parse_rational, Rational};
use repdiff::gamma_integral::{integral_closed_form, quadrature_check};
use repdiff::hkdf_poly::hm;
use repdiff::jet_oracle::{jet_compose_umbral, nth_derivative, nth_derivative_product};
use repdiff::special_sequences::{bessel_poly as bessel_poly_rs, laguerre_2var, stirling as stirling_rs, StirlingFamily};
use repdiff::umbral_func::builtin_by_name;
use repdiff::{DerivativeExpansion, Error, HkdfPoly, TaylorJet, UmbralFunction};

create_exception!(pyrepdiff, DomainError, PyValueError, "Argument outside the domain of the operation.");
create_exception!(pyrepdiff, ConvergenceError, PyRuntimeError, "A series or quadrature did not converge.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) => DomainError::new_err(e.to_string()),
        Error::NonConvergence(_) | Error::Quadrature(_) => ConvergenceError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn fraction<'py>(py: Python<'py>, q: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((q.to_string(),))
}

fn rational_arg(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    parse_rational(&obj.str()?.to_cow()?).map_err(to_py)
}

fn params(a: Option<&Bound<'_, PyAny>>, b: Option<&Bound<'_, PyAny>>) -> PyResult<BTreeMap<String, Rational>> {
    let mut out = BTreeMap::new();
    for (name, v) in [("a", a), ("b", b)] {
        if let Some(v) = v {
            out.insert(name.to_string(), rational_arg(v)?);
        }
    }
    Ok(out)
}

fn float_params(p: &BTreeMap<String, Rational>) -> BTreeMap<String, f64> {
    p.iter().map(|(k, v)| (k.clone(), repdiff::exact_arith::to_f64(v))).collect()
}

fn single_inner(name: &str, m: Option<u32>) -> PyResult<InnerMap> {
    match RuleSpec::parse(name, m).map_err(to_py)? {
        RuleSpec::Single(inner) => Ok(inner),
        _ => Err(PyValueError::new_err(format!("`{name}` is a product rule; use jet_product_derivative"))),
    }
}

type TermTuple<'py> = (Bound<'py, PyAny>, i64, u32, BTreeMap<String, u32>);

/// A derivative expansion `Dⁿ f(u(x)) = Σ c · x^p · f⁽ᵏ⁾(u)`.
#[pyclass(name = "Expansion", module = "pyrepdiff", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyExpansion {
    inner: DerivativeExpansion,
}

#[pymethods]
impl PyExpansion {
    /// Closed-form expansion of `Dⁿ f(u(x))` for a named inner map
    /// (`square`, `cubic`, `quadpoly`, `sqrt`, `reciprocal`, `power(m)`).
    #[new]
    #[pyo3(signature = (inner, n, m=None))]
    fn new(inner: &str, n: u32, m: Option<u32>) -> PyResult<Self> {
        let map = single_inner(inner, m)?;
        Ok(Self { inner: rule(map, n).map_err(to_py)? })
    }

    #[getter]
    fn order(&self) -> u32 {
        self.inner.order_n
    }

    #[getter]
    fn inner_map(&self) -> String {
        self.inner.inner.to_string()
    }

    /// Terms as `(coefficient, x_exponent, inner_order, params)` tuples.
    fn terms<'py>(&self, py: Python<'py>) -> PyResult<Vec<TermTuple<'py>>> {
        self.inner
            .terms
            .iter()
            .map(|t| Ok((fraction(py, &t.coefficient)?, t.x_exponent, t.inner_order, t.extra_scale.clone())))
            .collect()
    }

    /// Substitute values for the symbolic parameters `a`, `b`.
    #[pyo3(signature = (a=None, b=None))]
    fn specialize(&self, a: Option<&Bound<'_, PyAny>>, b: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.specialize(&params(a, b)?) })
    }

    /// The expansion of one order higher, by term-wise differentiation.
    fn differentiate(&self) -> PyResult<Self> {
        Ok(Self { inner: recurrence_differentiate(&self.inner, self.inner.inner).map_err(to_py)? })
    }

    /// Numeric value at `x0` for an outer function given by name or object.
    #[pyo3(signature = (f, x0, a=None, b=None))]
    fn evaluate(
        &self,
        f: &Bound<'_, PyAny>,
        x0: f64,
        a: Option<&Bound<'_, PyAny>>,
        b: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<f64> {
        let f = outer(f)?;
        let p = float_params(&params(a, b)?);
        Ok(evaluate_expansion_detailed(&self.inner, &f.inner, x0, &p).map_err(to_py)?.value)
    }

    fn __len__(&self) -> usize {
        self.inner.terms.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expansion('{}', {}, terms={})", self.inner.inner, self.inner.order_n, self.inner.terms.len())
    }
}

/// An outer function known through its umbral coefficient sequence.
#[pyclass(name = "UmbralFunction", module = "pyrepdiff", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyUmbral {
    name: String,
    inner: UmbralFunction,
}

fn outer(f: &Bound<'_, PyAny>) -> PyResult<PyUmbral> {
    if let Ok(u) = f.cast::<PyUmbral>() {
        return Ok(u.get().clone());
    }
    PyUmbral::new(&f.extract::<String>()?)
}

#[pymethods]
impl PyUmbral {
    /// Built-in by name: `exp`, `gauss(a)`, `tricomi(a)`, `bessel_j(v)`,
    /// `monomial(p)`, `besselu`, `bessel_vacuum`.
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        Ok(Self { name: name.to_string(), inner: builtin_by_name(name).map_err(to_py)? })
    }

    fn value(&self, u: f64) -> PyResult<f64> {
        self.inner.value(u).map_err(to_py)
    }

    /// `f⁽ᵐ⁾(u)`.
    fn derivative(&self, m: u32, u: f64) -> PyResult<f64> {
        self.inner.derivative_at(m, u).map_err(to_py)
    }

    /// The umbral coefficient at index `nu`.
    fn coefficient(&self, nu: f64) -> PyResult<f64> {
        self.inner.coefficient(nu).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("UmbralFunction('{}')", self.name)
    }
}

/// A truncated Taylor series around a fixed centre.
#[pyclass(name = "TaylorJet", module = "pyrepdiff", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyJet {
    inner: TaylorJet,
}

#[pymethods]
impl PyJet {
    /// The identity jet `x` around `center`, truncated after `order`.
    #[staticmethod]
    fn variable(center: f64, order: usize) -> Self {
        Self { inner: TaylorJet::var(center, order) }
    }

    #[staticmethod]
    fn constant(center: f64, value: f64, order: usize) -> Self {
        Self { inner: TaylorJet::constant(center, value, order) }
    }

    #[getter]
    fn center(&self) -> f64 {
        self.inner.center
    }

    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.inner.coefficients.clone()
    }

    /// `n`-th derivative at the centre.
    fn derivative(&self, n: usize) -> f64 {
        self.inner.derivative(n)
    }

    fn compose(&self, f: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Self { inner: jet_compose_umbral(&outer(f)?.inner, &self.inner).map_err(to_py)? })
    }

    fn recip(&self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.recip().map_err(to_py)? })
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.add(&other.inner).map_err(to_py)? })
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.sub(&other.inner).map_err(to_py)? })
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.mul(&other.inner).map_err(to_py)? })
    }

    fn __pow__(&self, p: u32, _modulo: Option<u32>) -> Self {
        Self { inner: self.inner.powi(p) }
    }

    fn __repr__(&self) -> String {
        format!("TaylorJet(center={}, coefficients={:?})", self.inner.center, self.inner.coefficients)
    }
}

/// Hermite–Kampé de Fériet polynomial `H_n^{(m)}(ξ₁, …, ξ_m)`.
#[pyclass(name = "HkdfPoly", module = "pyrepdiff", frozen, skip_from_py_object)]
struct PyHkdf {
    inner: HkdfPoly,
}

#[pymethods]
impl PyHkdf {
    #[new]
    fn new(m: usize, n: u32) -> PyResult<Self> {
        Ok(Self { inner: hm(m, n).map_err(to_py)? })
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.inner.degree
    }

    #[getter]
    fn num_variables(&self) -> usize {
        self.inner.num_variables
    }

    /// Exact value at rational arguments.
    fn evaluate<'py>(&self, py: Python<'py>, args: Vec<Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
        let args = args.iter().map(rational_arg).collect::<PyResult<Vec<_>>>()?;
        fraction(py, &self.inner.evaluate(&args).map_err(to_py)?)
    }

    fn __str__(&self) -> String {
        self.inner.to_expression()
    }

    fn __repr__(&self) -> String {
        format!("HkdfPoly(m={}, n={})", self.inner.num_variables, self.inner.degree)
    }
}

/// `Dⁿ f(u(x))` at `x0` from truncated Taylor series, independent of the
/// closed-form rules.
#[pyfunction]
#[pyo3(signature = (f, inner, n, x0, m=None, a=None, b=None))]
fn jet_derivative(
    f: &Bound<'_, PyAny>,
    inner: &str,
    n: usize,
    x0: f64,
    m: Option<u32>,
    a: Option<&Bound<'_, PyAny>>,
    b: Option<&Bound<'_, PyAny>>,
) -> PyResult<f64> {
    let map = single_inner(inner, m)?;
    nth_derivative(&outer(f)?.inner, map, &float_params(&params(a, b)?), n, x0).map_err(to_py)
}

/// `Dⁿ [g(u) h(u)]` at `x0` from Taylor series.
#[pyfunction]
#[pyo3(signature = (g, h, inner, n, x0, m=None))]
fn jet_product_derivative(
    g: &Bound<'_, PyAny>,
    h: &Bound<'_, PyAny>,
    inner: &str,
    n: usize,
    x0: f64,
    m: Option<u32>,
) -> PyResult<f64> {
    let map = single_inner(inner, m)?;
    nth_derivative_product(&outer(g)?.inner, &outer(h)?.inner, map, &BTreeMap::new(), n, x0).map_err(to_py)
}

/// Generalized Stirling number for family `"1"`, `"1/2"` or `"-1"`.
#[pyfunction]
fn stirling<'py>(py: Python<'py>, family: &str, n: u32, k: i64) -> PyResult<Bound<'py, PyAny>> {
    let family: StirlingFamily = family.parse().map_err(to_py)?;
    fraction(py, &stirling_rs(family, n, k))
}

/// Coefficients of the Bessel polynomial `y_n(x)`, lowest degree first.
#[pyfunction]
fn bessel_poly<'py>(py: Python<'py>, n: i64) -> PyResult<Vec<Bound<'py, PyAny>>> {
    let p = bessel_poly_rs(n).map_err(to_py)?;
    p.univariate_coefficients().iter().map(|c| fraction(py, c)).collect()
}

/// Two-variable Laguerre polynomial `L_n(x, y)` as an expression string.
#[pyfunction]
fn laguerre(n: u32) -> String {
    laguerre_2var(n).to_expression()
}

/// Closed form of `∫ Σ_k n!(ax)^{n−2k} bᵏ/((n−2k)! k!) f⁽ⁿ⁻ᵏ⁾(−cx²) dx` over ℝ, with an
/// optional quadrature cross-check.
#[pyfunction]
#[pyo3(signature = (order, a, b, c, f="exp", check=false, tol=1e-8))]
#[allow(clippy::too_many_arguments)]
fn gaussian_integral<'py>(
    py: Python<'py>,
    order: u32,
    a: f64,
    b: f64,
    c: f64,
    f: &str,
    check: bool,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let fun = builtin_by_name(f).map_err(to_py)?;
    let r = integral_closed_form(order, a, b, c, &fun).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("value", r.numeric_value)?;
    out.set_item("form", r.form())?;
    if let Some(exact) = &r.exact_part {
        out.set_item("exact_sqrt_pi_part", exact.to_string())?;
    }
    if check {
        let q = quadrature_check(order, a, b, c, &fun, None, tol).map_err(to_py)?;
        out.set_item("quadrature", q.quadrature)?;
        out.set_item("passed", q.passed)?;
    }
    Ok(out)
}

/// Compare closed-form rules against the jet oracle. `rule="all"` runs the
/// built-in matrix; returns `(passed, worst_relative_error, records)`.
#[pyfunction]
#[pyo3(signature = (rule, n_max, points=None, f="exp", tol=1e-9))]
fn verify(rule: &str, n_max: u32, points: Option<Vec<f64>>, f: &str, tol: f64) -> PyResult<(bool, f64, usize)> {
    let cases = if rule == "all" {
        full_matrix(n_max)
    } else {
        let points = points.ok_or_else(|| PyValueError::new_err("points are required for a single rule"))?;
        vec![VerifyCase { inner: single_inner(rule, None)?, f: f.to_string(), n_max, points, params: BTreeMap::new() }]
    };
    let report = run_verify(&cases, tol, None).map_err(to_py)?;
    let worst = report
        .records
        .iter()
        .map(|r| if r.abs_error == 0.0 { 0.0 } else { r.abs_error / r.oracle.abs() })
        .fold(0.0, f64::max);
    Ok((report.failed() == 0, worst, report.records.len()))
}

#[pymodule]
fn pyrepdiff(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExpansion>()?;
    m.add_class::<PyUmbral>()?;
    m.add_class::<PyJet>()?;
    m.add_class::<PyHkdf>()?;
    m.add_function(wrap_pyfunction!(jet_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(jet_product_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(stirling, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_poly, m)?)?;
    m.add_function(wrap_pyfunction!(laguerre, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_integral, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add("ConvergenceError", m.py().get_type::<ConvergenceError>())?;
    Ok(())
}
