//! The `repdiff` command-line front end.
//!
//! Every subcommand writes one JSON document to stdout (or CSV with
//! `--format csv`). Exact rationals are written as `"num/den"` strings.
//! Exit codes: 0 success, 1 verification or numerical failure, 2 usage
//! error, 3 domain error. The record layouts are described in
//! `docs/output-format.md`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::derivative_rules::{
    evaluate_expansion_detailed, rule as single_rule, Collector, DerivativeExpansion, InnerMap, ParamMonomial,
};
use crate::error::{Error, Result};
use crate::exact_arith::{parse_rational, to_f64, Rational};
use crate::gamma_integral::{
    bessel_j0_gamma_integral_exact, integral_closed_form_exact, oscillatory_quadrature_check, quadrature_check,
};
use crate::hkdf_poly::hm;
use crate::jet_oracle::{nth_derivative, nth_derivative_product};
use crate::leibniz_product::{evaluate_product, leibniz_cubic, leibniz_square, ProductExpansion};
use crate::special_sequences::{bessel_poly, laguerre_2var, StirlingFamily, StirlingTable};
use crate::umbral_func::builtin_by_name;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "repdiff", version, about = "Closed-form repeated derivatives of composite functions")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the exact term list of a rule.
    Expand(ExpandArgs),
    /// Evaluate a rule numerically at a point.
    Eval(EvalArgs),
    /// Compare closed forms against the jet oracle.
    Verify(VerifyArgs),
    /// Tabulate Stirling numbers or special polynomials.
    Table(TableArgs),
    /// Gaussian-type integrals of the Γ-operator.
    Integral(IntegralArgs),
}

#[derive(Debug, Args)]
pub struct RuleArgs {
    /// square, cubic, power, quadpoly, sqrt, reciprocal, leibniz-square or leibniz-cubic.
    pub rule: String,
    /// Derivative order.
    pub n: u32,
    /// Exponent for the power rule.
    #[arg(long)]
    pub m: Option<u32>,
    /// Coefficient `a` of `ax² + bx`.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Coefficient `b` of `ax² + bx`.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Outer function, e.g. exp, gauss(-1), tricomi0, besselu.
    #[arg(long, default_value = "exp")]
    pub f: String,
    /// First factor of a product rule (defaults to --f).
    #[arg(long)]
    pub g: Option<String>,
    /// Second factor of a product rule (defaults to --f).
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: f64,
    /// Also report the jet-oracle value.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// A single-function rule, or `all` for the full matrix.
    pub rule: String,
    /// Largest derivative order checked.
    pub n_max: u32,
    #[arg(long, default_value = "exp")]
    pub f: String,
    /// Comma-separated evaluation points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub points: Vec<f64>,
    /// Relative tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Test hook: double one coefficient, given as `rule:n:term`.
    #[arg(long, hide = true)]
    pub inject_fault: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Stirling,
    BesselPoly,
    Laguerre,
    Hermite,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    pub what: TableKind,
    /// Largest index.
    #[arg(long)]
    pub n: u32,
    /// Stirling family: 1, 1/2 or -1.
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub family: String,
    /// Number of Hermite variables.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
}

#[derive(Debug, Args)]
pub struct IntegralArgs {
    /// Integral order (or use --n).
    #[arg(value_name = "ORDER")]
    pub order: Option<u32>,
    /// Order; with --bessel-j0 this is the `n` of `Γ⁽²ⁿ⁾`.
    #[arg(long = "n")]
    pub n_flag: Option<u32>,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub a: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub b: String,
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub c: String,
    #[arg(long, default_value = "exp")]
    pub f: String,
    /// Use the J₀ display with c = 1/4.
    #[arg(long)]
    pub bessel_j0: bool,
    /// Also integrate numerically.
    #[arg(long)]
    pub check: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

/// A rule selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleSpec {
    Single(InnerMap),
    LeibnizSquare,
    LeibnizCubic,
}

impl RuleSpec {
    pub fn parse(name: &str, m: Option<u32>) -> Result<Self> {
        match name {
            "leibniz-square" => Ok(RuleSpec::LeibnizSquare),
            "leibniz-cubic" => Ok(RuleSpec::LeibnizCubic),
            "power" => {
                let m = m.ok_or_else(|| Error::MissingParameter("--m".into()))?;
                Ok(RuleSpec::Single(name_with_m(m)?))
            }
            other => Ok(RuleSpec::Single(other.parse()?)),
        }
    }
}

fn name_with_m(m: u32) -> Result<InnerMap> {
    if m == 0 {
        return Err(Error::InvalidArgument("power rule needs m ≥ 1".into()));
    }
    Ok(InnerMap::Power(m))
}

fn rational_params(a: &Option<String>, b: &Option<String>) -> Result<BTreeMap<String, Rational>> {
    let mut out = BTreeMap::new();
    if let Some(a) = a {
        out.insert("a".to_string(), parse_rational(a)?);
    }
    if let Some(b) = b {
        out.insert("b".to_string(), parse_rational(b)?);
    }
    Ok(out)
}

fn float_params(p: &BTreeMap<String, Rational>) -> BTreeMap<String, f64> {
    p.iter().map(|(k, v)| (k.clone(), to_f64(v))).collect()
}

fn params_json(p: &BTreeMap<String, Rational>) -> Value {
    Value::Object(p.iter().map(|(k, v)| (k.clone(), Value::String(v.to_string()))).collect())
}

/// JSON record for a single-function expansion.
pub fn expansion_to_json(e: &DerivativeExpansion) -> Value {
    let base = e.base.symbol();
    let mut terms: Vec<&crate::derivative_rules::ExpansionTerm> = e.terms.iter().collect();
    terms.sort_by_key(|t| std::cmp::Reverse((t.inner_order, t.x_exponent)));
    let terms: Vec<Value> = terms
        .into_iter()
        .map(|t| {
            let mut m = Map::new();
            m.insert("c".into(), Value::String(t.coefficient.to_string()));
            m.insert(base.into(), json!(t.x_exponent));
            m.insert("d".into(), json!(t.inner_order));
            if !t.extra_scale.is_empty() {
                m.insert("params".into(), json!(t.extra_scale));
            }
            Value::Object(m)
        })
        .collect();
    json!({ "rule": e.inner.to_string(), "n": e.order_n, "base": base, "terms": terms })
}

/// Inverse of [`expansion_to_json`].
pub fn expansion_from_json(v: &Value) -> Result<DerivativeExpansion> {
    let bad = |what: &str| Error::InvalidArgument(format!("malformed expansion record: {what}"));
    let inner: InnerMap = v["rule"].as_str().ok_or_else(|| bad("rule"))?.parse()?;
    let n = v["n"].as_u64().ok_or_else(|| bad("n"))? as u32;
    let base = inner.base().symbol();
    let mut c = Collector::default();
    for t in v["terms"].as_array().ok_or_else(|| bad("terms"))? {
        let coeff = parse_rational(t["c"].as_str().ok_or_else(|| bad("c"))?)?;
        let x = t[base].as_i64().ok_or_else(|| bad(base))?;
        let d = t["d"].as_u64().ok_or_else(|| bad("d"))? as u32;
        let mut params = ParamMonomial::new();
        if let Some(p) = t.get("params").and_then(Value::as_object) {
            for (k, e) in p {
                params.insert(k.clone(), e.as_u64().ok_or_else(|| bad("params"))? as u32);
            }
        }
        c.add(coeff, x, d, params);
    }
    Ok(c.into_expansion(n, inner))
}

/// JSON record for a product expansion.
pub fn product_to_json(name: &str, e: &ProductExpansion) -> Value {
    let mut terms: Vec<_> = e.terms.iter().collect();
    terms.sort_by(|a, b| {
        (b.g_order + b.h_order, b.g_order, b.x_exponent).cmp(&(a.g_order + a.h_order, a.g_order, a.x_exponent))
    });
    let terms: Vec<Value> = terms
        .into_iter()
        .map(|t| json!({ "c": t.coefficient.to_string(), "x": t.x_exponent, "g": t.g_order, "h": t.h_order }))
        .collect();
    json!({ "rule": name, "n": e.order_n, "base": "x", "terms": terms })
}

fn product_expansion(spec: RuleSpec, n: u32) -> Option<(&'static str, ProductExpansion)> {
    match spec {
        RuleSpec::LeibnizSquare => Some(("leibniz-square", leibniz_square(n))),
        RuleSpec::LeibnizCubic => Some(("leibniz-cubic", leibniz_cubic(n))),
        RuleSpec::Single(_) => None,
    }
}

pub fn cmd_expand(args: &ExpandArgs) -> Result<Value> {
    let r = &args.rule;
    let spec = RuleSpec::parse(&r.rule, r.m)?;
    if let Some((name, e)) = product_expansion(spec, r.n) {
        return Ok(product_to_json(name, &e));
    }
    let RuleSpec::Single(inner) = spec else { unreachable!() };
    let params = rational_params(&r.a, &r.b)?;
    let mut e = single_rule(inner, r.n)?;
    if !params.is_empty() {
        e = e.specialize(&params);
    }
    let mut record = expansion_to_json(&e);
    if !params.is_empty() {
        record["params"] = params_json(&params);
    }
    Ok(record)
}

fn relative_error(value: f64, reference: f64) -> f64 {
    let diff = (value - reference).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / reference.abs()
    }
}

pub fn cmd_eval(args: &EvalArgs) -> Result<Value> {
    let r = &args.rule;
    let spec = RuleSpec::parse(&r.rule, r.m)?;
    let params = rational_params(&r.a, &r.b)?;
    let fparams = float_params(&params);
    let mut record = json!({ "rule": r.rule, "n": r.n, "x0": args.x0 });
    let (value, term_scale, oracle) = match product_expansion(spec, r.n) {
        Some((_, e)) => {
            let g_name = args.g.clone().unwrap_or_else(|| args.f.clone());
            let h_name = args.h.clone().unwrap_or_else(|| args.f.clone());
            let (g, h) = (builtin_by_name(&g_name)?, builtin_by_name(&h_name)?);
            record["g"] = json!(g_name);
            record["h"] = json!(h_name);
            let ev = evaluate_product(&e, &g, &h, args.x0)?;
            let oracle = if args.oracle {
                Some(nth_derivative_product(&g, &h, e.inner, &fparams, r.n as usize, args.x0)?)
            } else {
                None
            };
            (ev.value, ev.term_scale, oracle)
        }
        None => {
            let RuleSpec::Single(inner) = spec else { unreachable!() };
            let f = builtin_by_name(&args.f)?;
            record["f"] = json!(args.f);
            record["rule"] = json!(inner.to_string());
            let ev = evaluate_expansion_detailed(&single_rule(inner, r.n)?, &f, args.x0, &fparams)?;
            let oracle = if args.oracle {
                Some(nth_derivative(&f, inner, &fparams, r.n as usize, args.x0)?)
            } else {
                None
            };
            (ev.value, ev.term_scale, oracle)
        }
    };
    if !params.is_empty() {
        record["params"] = params_json(&params);
    }
    record["value"] = json!(value);
    record["term_scale"] = json!(term_scale);
    if let Some(o) = oracle {
        record["oracle"] = json!(o);
        record["rel_error"] = json!(relative_error(value, o));
    }
    Ok(record)
}

/// One coefficient to corrupt: the `term`-th entry of `rule` at order `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fault {
    pub rule: String,
    pub n: u32,
    pub term: usize,
}

impl std::str::FromStr for Fault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("fault must be rule:n:term, got {s:?}"));
        let mut parts = s.rsplitn(3, ':');
        let term = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let n = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let rule = parts.next().ok_or_else(bad)?.to_string();
        Ok(Fault { rule, n, term })
    }
}

impl std::fmt::Display for Fault {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.rule, self.n, self.term)
    }
}

/// One rule checked against the oracle for one outer function.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyCase {
    pub inner: InnerMap,
    pub f: String,
    pub n_max: u32,
    pub points: Vec<f64>,
    pub params: BTreeMap<String, Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRecord {
    pub rule: String,
    pub f: String,
    pub n: u32,
    pub x0: f64,
    pub closed_form: f64,
    pub oracle: f64,
    pub abs_error: f64,
    pub term_scale: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub tolerance: f64,
    pub records: Vec<VerifyRecord>,
}

impl VerifyReport {
    pub fn failed(&self) -> usize {
        self.records.iter().filter(|r| !r.pass).count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.failed() == 0 {
            EXIT_OK
        } else {
            EXIT_VERIFY_FAILED
        }
    }

    pub fn to_json(&self) -> Value {
        let records: Vec<Value> = self
            .records
            .iter()
            .map(|r| {
                json!({
                    "rule": r.rule, "f": r.f, "n": r.n, "x0": r.x0,
                    "closed_form": r.closed_form, "oracle": r.oracle,
                    "abs_error": r.abs_error, "term_scale": r.term_scale, "pass": r.pass,
                })
            })
            .collect();
        json!({
            "records": records,
            "summary": {
                "total": self.records.len(),
                "failed": self.failed(),
                "tolerance": self.tolerance,
                "passed": self.failed() == 0,
            },
        })
    }
}

/// The full matrix: six rules, three outer functions, three points each.
pub fn full_matrix(n_max: u32) -> Vec<VerifyCase> {
    let rules: [(InnerMap, [f64; 3]); 6] = [
        (InnerMap::Square, [0.3, 1.0, 2.5]),
        (InnerMap::Cubic, [0.4, 0.9, 1.6]),
        (InnerMap::Power(4), [0.5, 1.0, 1.3]),
        (InnerMap::QuadPoly, [-0.7, 0.4, 1.1]),
        (InnerMap::Sqrt, [0.5, 2.0, 4.0]),
        (InnerMap::Reciprocal, [0.5, 1.5, -2.0]),
    ];
    let mut cases = Vec::new();
    for (inner, points) in rules {
        for f in ["exp", "gauss(-1)", "tricomi0"] {
            let params = if inner == InnerMap::QuadPoly {
                crate::derivative_rules::quad_params(2, 3)
            } else {
                BTreeMap::new()
            };
            cases.push(VerifyCase { inner, f: f.to_string(), n_max, points: points.to_vec(), params });
        }
    }
    cases
}

/// Comparison rule: relative to the oracle, except for values that are
/// negligible against their own term magnitudes, which are compared on
/// that scale instead.
pub fn within_tolerance(closed: f64, oracle: f64, term_scale: f64, tol: f64) -> bool {
    let diff = (closed - oracle).abs();
    if diff <= tol * oracle.abs() {
        return true;
    }
    oracle.abs() <= tol * term_scale && diff <= tol * term_scale
}

pub fn run_verify(cases: &[VerifyCase], tolerance: f64, fault: Option<&Fault>) -> Result<VerifyReport> {
    let mut records = Vec::new();
    let mut fault_used = false;
    for case in cases {
        let f = builtin_by_name(&case.f)?;
        let fparams = float_params(&case.params);
        for n in 0..=case.n_max {
            let mut e = single_rule(case.inner, n)?;
            if let Some(fault) = fault {
                if fault.rule == case.inner.to_string() && fault.n == n {
                    let len = e.terms.len();
                    let t = e.terms.get_mut(fault.term).ok_or_else(|| {
                        Error::InvalidArgument(format!("fault {fault} targets a missing term ({len} terms)"))
                    })?;
                    t.coefficient = &t.coefficient + &t.coefficient;
                    fault_used = true;
                }
            }
            for &x0 in &case.points {
                let ev = evaluate_expansion_detailed(&e, &f, x0, &fparams)?;
                let oracle = nth_derivative(&f, case.inner, &fparams, n as usize, x0)?;
                records.push(VerifyRecord {
                    rule: case.inner.to_string(),
                    f: case.f.clone(),
                    n,
                    x0,
                    closed_form: ev.value,
                    oracle,
                    abs_error: (ev.value - oracle).abs(),
                    term_scale: ev.term_scale,
                    pass: within_tolerance(ev.value, oracle, ev.term_scale, tolerance),
                });
            }
        }
    }
    if let (Some(fault), false) = (fault, fault_used) {
        return Err(Error::InvalidArgument(format!("fault {fault} matches no checked expansion")));
    }
    Ok(VerifyReport { tolerance, records })
}

/// Every single-coefficient fault reachable in `cases`.
pub fn fault_targets(cases: &[VerifyCase]) -> Result<Vec<Fault>> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for case in cases {
        for n in 0..=case.n_max {
            let name = case.inner.to_string();
            if !seen.insert((name.clone(), n)) {
                continue;
            }
            for term in 0..single_rule(case.inner, n)?.terms.len() {
                out.push(Fault { rule: name.clone(), n, term });
            }
        }
    }
    Ok(out)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<VerifyReport> {
    let fault = args.inject_fault.as_deref().map(str::parse::<Fault>).transpose()?;
    let cases = if args.rule == "all" {
        full_matrix(args.n_max)
    } else {
        let RuleSpec::Single(inner) = RuleSpec::parse(&args.rule, args.m)? else {
            return Err(Error::InvalidArgument("verify takes single-function rules".into()));
        };
        if args.points.is_empty() {
            return Err(Error::MissingParameter("--points".into()));
        }
        let params = rational_params(&args.a, &args.b)?;
        vec![VerifyCase { inner, f: args.f.clone(), n_max: args.n_max, points: args.points.clone(), params }]
    };
    run_verify(&cases, args.tol, fault.as_ref())
}

fn term_map_json(terms: &BTreeMap<Vec<u32>, Rational>, names: &[&str]) -> Vec<Value> {
    terms
        .iter()
        .rev()
        .map(|(e, c)| {
            let mut m = Map::new();
            m.insert("c".into(), Value::String(c.to_string()));
            for (name, p) in names.iter().zip(e) {
                m.insert((*name).into(), json!(p));
            }
            Value::Object(m)
        })
        .collect()
}

pub fn cmd_table(args: &TableArgs) -> Result<Value> {
    let rows: Vec<Value> = match args.what {
        TableKind::Stirling => {
            let family: StirlingFamily = args.family.parse()?;
            let table = StirlingTable::build(family, args.n);
            let rows: Vec<Value> = table
                .values
                .iter()
                .map(|((n, k), v)| json!({ "n": n, "k": k, "value": v.to_string() }))
                .collect();
            return Ok(json!({ "table": "stirling", "family": family.to_string(), "n_max": args.n, "rows": rows }));
        }
        TableKind::BesselPoly => (0..=args.n)
            .map(|n| {
                let p = bessel_poly(n as i64)?;
                let coefficients: Vec<String> = p.univariate_coefficients().iter().map(|c| c.to_string()).collect();
                Ok(json!({ "n": n, "coefficients": coefficients, "expression": p.to_expression() }))
            })
            .collect::<Result<_>>()?,
        TableKind::Laguerre => (0..=args.n)
            .map(|n| {
                let p = laguerre_2var(n);
                json!({ "n": n, "terms": term_map_json(&p.terms, &["x", "y"]), "expression": p.to_expression() })
            })
            .collect(),
        TableKind::Hermite => (0..=args.n)
            .map(|n| {
                let p = hm(args.m, n)?;
                let names = p.variable_names();
                let names: Vec<&str> = names.iter().map(String::as_str).collect();
                Ok(json!({ "n": n, "terms": term_map_json(&p.terms, &names), "expression": p.to_expression() }))
            })
            .collect::<Result<_>>()?,
    };
    let name = match args.what {
        TableKind::Stirling => "stirling",
        TableKind::BesselPoly => "bessel-poly",
        TableKind::Laguerre => "laguerre",
        TableKind::Hermite => "hermite",
    };
    let mut record = json!({ "table": name, "n_max": args.n, "rows": rows });
    if args.what == TableKind::Hermite {
        record["m"] = json!(args.m);
    }
    Ok(record)
}

pub fn cmd_integral(args: &IntegralArgs) -> Result<Value> {
    let order = match (args.order, args.n_flag) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::InvalidArgument(format!("conflicting orders {a} and --n {b}")));
        }
        (Some(n), _) | (None, Some(n)) => n,
        (None, None) => return Err(Error::MissingParameter("ORDER or --n".into())),
    };
    let a = parse_rational(&args.a)?;
    let b = parse_rational(&args.b)?;
    if args.bessel_j0 {
        let value = bessel_j0_gamma_integral_exact(order, &a, &b)?;
        return Ok(json!({
            "kind": "bessel-j0", "n": order, "a": a.to_string(), "b": b.to_string(),
            "exact": value.to_string(), "value": to_f64(&value),
        }));
    }
    let c = parse_rational(&args.c)?;
    let f = builtin_by_name(&args.f)?;
    let r = integral_closed_form_exact(order, &a, &b, &c, &f)?;
    let mut record = json!({
        "kind": "gaussian", "order": order, "a": a.to_string(), "b": b.to_string(), "c": c.to_string(),
        "f": args.f, "form": r.form(), "value": r.numeric_value,
    });
    if let Some(e) = &r.exact_part {
        record["exact"] = json!(e.to_string());
    }
    if args.check {
        let (af, bf, cf) = (to_f64(&a), to_f64(&b), to_f64(&c));
        // J₀-type integrands decay only algebraically
        let q = if f.label == "bessel_vacuum" {
            oscillatory_quadrature_check(order, af, bf, cf, &f, args.tol)?
        } else {
            quadrature_check(order, af, bf, cf, &f, None, args.tol)?
        };
        record["quadrature"] = json!({
            "value": q.quadrature, "error_estimate": q.error_estimate,
            "tolerance": args.tol, "pass": q.passed,
        });
    }
    Ok(record)
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Flattens a record to CSV: `terms`, `rows` and `records` arrays become one
/// line per entry, anything else becomes `key,value` lines.
pub fn write_csv(record: &Value, out: &mut dyn Write) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let array = ["terms", "rows", "records"].iter().find_map(|k| record.get(*k).and_then(Value::as_array));
    match array {
        Some(items) => {
            let mut header: Vec<String> = Vec::new();
            for item in items {
                if let Some(obj) = item.as_object() {
                    for k in obj.keys() {
                        if !header.contains(k) {
                            header.push(k.clone());
                        }
                    }
                }
            }
            w.write_record(&header).map_err(io)?;
            for item in items {
                let row: Vec<String> = header.iter().map(|k| csv_cell(item.get(k).unwrap_or(&Value::Null))).collect();
                w.write_record(&row).map_err(io)?;
            }
        }
        None => {
            w.write_record(["key", "value"]).map_err(io)?;
            if let Some(obj) = record.as_object() {
                for (k, v) in obj {
                    w.write_record([k.as_str(), csv_cell(v).as_str()]).map_err(io)?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
    Ok(())
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Domain(_) => EXIT_DOMAIN,
        Error::NonConvergence(_) | Error::Quadrature(_) => EXIT_VERIFY_FAILED,
        _ => EXIT_USAGE,
    }
}

fn emit(record: &Value, format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => writeln!(out, "{record}").map_err(|e| Error::InvalidArgument(format!("write failed: {e}"))),
        Format::Csv => write_csv(record, out),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Expand(a) => cmd_expand(a).map(|r| (r, EXIT_OK)),
        Command::Eval(a) => cmd_eval(a).map(|r| (r, EXIT_OK)),
        Command::Verify(a) => cmd_verify(a).map(|r| (r.to_json(), r.exit_code())),
        Command::Table(a) => cmd_table(a).map(|r| (r, EXIT_OK)),
        Command::Integral(a) => cmd_integral(a).map(|r| {
            let ok = r["quadrature"].get("pass").and_then(Value::as_bool).unwrap_or(true);
            (r, if ok { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }),
    };
    match result.and_then(|(record, code)| emit(&record, cli.format, out).map(|_| code)) {
        Ok(code) => {
            if code == EXIT_VERIFY_FAILED {
                let _ = writeln!(err, "verification failed");
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_for(&e)
        }
    }
}
