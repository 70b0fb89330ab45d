//! Gaussian-type integrals of the Γ-operator,
//! `Iₙ(a,b,c) = ∫ Γ⁽ⁿ⁾(a/2, b) f(−cx²) dx`, in closed form and by quadrature.
//!
//! Order `2n` gives `2ⁿ (2n−1)!! √(π/c) (a²/(4c) + b)ⁿ f_{n−1/2}`; odd
//! orders vanish. The closed form needs half-integer coefficients and the
//! plain sign convention `f(v) = Σ vʲ fⱼ / j!`.

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact_arith::{double_factorial, factorial, gamma_half_integer, int, rpow, to_f64, HalfIntegerGamma, Rational};
use crate::quadrature::{integrate, integrate_oscillatory_tail};
use crate::umbral_func::{ExactCoefficient, IndexStep, UmbralFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct GammaIntegralResult {
    pub order: u32,
    /// `2ⁿ (2n−1)!!` for order `2n`, zero for odd orders.
    pub multiplier: Rational,
    /// `a²/(4c) + b`.
    pub shift: f64,
    /// `f_{n−1/2}`; zero for odd orders.
    pub coefficient: f64,
    /// The value as `q·(√π)^s` when all inputs allow it.
    pub exact_part: Option<HalfIntegerGamma>,
    pub numeric_value: f64,
}

impl GammaIntegralResult {
    /// The closed form with the numeric parameters substituted.
    pub fn form(&self) -> String {
        if self.order % 2 == 1 {
            return "0".into();
        }
        let n = self.order / 2;
        format!(
            "{}·√(π/c)·({})^{}·f_({}/2)",
            self.multiplier,
            self.shift,
            n,
            2 * n as i64 - 1
        )
    }
}

impl fmt::Display for GammaIntegralResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact_part {
            Some(e) => write!(f, "{e} ≈ {}", self.numeric_value),
            None => write!(f, "{} ≈ {}", self.form(), self.numeric_value),
        }
    }
}

fn check_inputs(order: u32, c: f64, f: &UmbralFunction) -> Result<()> {
    if order == 0 {
        return Err(Error::InvalidArgument("integral order must be ≥ 1".into()));
    }
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::Domain(format!("Gaussian width c must be positive, got {c}")));
    }
    if f.index_step != IndexStep::Half {
        return Err(Error::KindMismatch {
            expected: "half-integer coefficients".into(),
            got: format!("`{}` with whole-index coefficients", f.label),
        });
    }
    if f.sign_convention != 1 {
        return Err(Error::KindMismatch {
            expected: "sign convention +1".into(),
            got: format!("`{}` with sign convention {}", f.label, f.sign_convention),
        });
    }
    Ok(())
}

fn multiplier(order: u32) -> Result<Rational> {
    let n = (order / 2) as i64;
    Ok(rpow(&int(2), n) * double_factorial(2 * n - 1)?)
}

/// The closed form with real parameters.
pub fn integral_closed_form(order: u32, a: f64, b: f64, c: f64, f: &UmbralFunction) -> Result<GammaIntegralResult> {
    check_inputs(order, c, f)?;
    let shift = a * a / (4.0 * c) + b;
    if order % 2 == 1 {
        return Ok(GammaIntegralResult {
            order,
            multiplier: Rational::zero(),
            shift,
            coefficient: 0.0,
            exact_part: Some(HalfIntegerGamma::rational(Rational::zero())),
            numeric_value: 0.0,
        });
    }
    let n = order / 2;
    let mult = multiplier(order)?;
    let coefficient = f.coefficient(n as f64 - 0.5)?;
    let numeric_value = to_f64(&mult) * (PI / c).sqrt() * shift.powi(n as i32) * coefficient;
    Ok(GammaIntegralResult { order, multiplier: mult, shift, coefficient, exact_part: None, numeric_value })
}

fn exact_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let root = |v: &BigInt| {
        let s = v.sqrt();
        (&s * &s == *v).then_some(s)
    };
    Some(Rational::new(root(r.numer())?, root(r.denom())?))
}

/// The closed form with rational parameters, carrying an exact value when
/// `√c` is rational and `f_{n−1/2}` is known exactly.
pub fn integral_closed_form_exact(
    order: u32,
    a: &Rational,
    b: &Rational,
    c: &Rational,
    f: &UmbralFunction,
) -> Result<GammaIntegralResult> {
    let mut result = integral_closed_form(order, to_f64(a), to_f64(b), to_f64(c), f)?;
    if order % 2 == 1 {
        return Ok(result);
    }
    let n = order / 2;
    let shift = a * a / (int(4) * c) + b;
    let exact = exact_sqrt(c).and_then(|root| {
        let base = HalfIntegerGamma::sqrt_pi(&result.multiplier * rpow(&shift, n as i64) / root);
        match f.exact_coefficient(2 * n as i64 - 1)? {
            ExactCoefficient::Value(v) => Some(base.scale(&v)),
            ExactCoefficient::OverGamma(q, g) => base.scale(&q).checked_div(&g),
        }
    });
    if let Some(e) = &exact {
        result.numeric_value = e.to_f64();
    }
    result.exact_part = exact;
    Ok(result)
}

/// `∫ Γ⁽²ⁿ⁾(a/2, b) J₀(x) dx = 2^{n+1} (2n−1)!! √π (a² + b)ⁿ / Γ(n + 1/2)`.
pub fn bessel_j0_gamma_integral(n: u32, a: f64, b: f64) -> Result<f64> {
    let (q, g) = bessel_j0_parts(n)?;
    // Γ(n+1/2) = g·√π, so the √π cancels.
    Ok(to_f64(&(q / g.rational_part)) * (a * a + b).powi(n as i32))
}

/// The same display with rational `a`, `b`: an exact rational.
pub fn bessel_j0_gamma_integral_exact(n: u32, a: &Rational, b: &Rational) -> Result<Rational> {
    let (q, g) = bessel_j0_parts(n)?;
    Ok(q / g.rational_part * rpow(&(a * a + b), n as i64))
}

fn bessel_j0_parts(n: u32) -> Result<(Rational, HalfIntegerGamma)> {
    if n == 0 {
        return Err(Error::InvalidArgument("the J₀ integral is stated for n ≥ 1".into()));
    }
    let q = rpow(&int(2), n as i64 + 1) * double_factorial(2 * n as i64 - 1)?;
    Ok((q, gamma_half_integer(2 * n as i64 + 1)?))
}

/// `x ↦ Σ_k order!·(ax)^{order−2k} b^k / ((order−2k)! k!) · f⁽ᵒʳᵈᵉʳ⁻ᵏ⁾(−cx²)`.
pub fn gamma_integrand(order: u32, a: f64, b: f64, c: f64, f: &UmbralFunction) -> impl Fn(f64) -> f64 + '_ {
    let weights: Vec<(u32, u32, f64)> = (0..=order / 2)
        .map(|k| {
            let w = to_f64(&(factorial(order) / (factorial(order - 2 * k) * factorial(k))));
            (order - 2 * k, order - k, w * b.powi(k as i32))
        })
        .collect();
    move |x: f64| {
        let v = -c * x * x;
        weights
            .iter()
            .map(|(p, m, w)| w * (a * x).powi(*p as i32) * f.derivative_at(*m, v).unwrap_or(f64::NAN))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureCheck {
    pub closed_form: f64,
    pub quadrature: f64,
    pub error_estimate: f64,
    pub passed: bool,
}

fn compare(order: u32, closed_form: f64, quadrature: f64, error_estimate: f64, tolerance: f64) -> Result<QuadratureCheck> {
    if !quadrature.is_finite() {
        return Err(Error::Quadrature("integrand evaluation failed".into()));
    }
    let passed = if order % 2 == 1 || closed_form == 0.0 {
        quadrature.abs() < tolerance
    } else {
        (quadrature - closed_form).abs() <= tolerance * closed_form.abs()
    };
    Ok(QuadratureCheck { closed_form, quadrature, error_estimate, passed })
}

/// Quadrature over `[−half_width, half_width]` (default `12/√c`) against the
/// closed form; relative tolerance for even orders, absolute for odd ones.
pub fn quadrature_check(
    order: u32,
    a: f64,
    b: f64,
    c: f64,
    f: &UmbralFunction,
    half_width: Option<f64>,
    tolerance: f64,
) -> Result<QuadratureCheck> {
    let closed = integral_closed_form(order, a, b, c, f)?.numeric_value;
    let l = half_width.unwrap_or(12.0 / c.sqrt());
    let abs_tol = 1e-3 * tolerance * closed.abs().max(1.0);
    let r = integrate(gamma_integrand(order, a, b, c, f), -l, l, 16, abs_tol)?;
    compare(order, closed, r.value, r.error_estimate, tolerance)
}

/// As [`quadrature_check`] for integrands such as `J₀` that oscillate with
/// half-period `π/(2√c)` and decay only algebraically: even orders use
/// twice the accelerated half-line integral.
pub fn oscillatory_quadrature_check(
    order: u32,
    a: f64,
    b: f64,
    c: f64,
    f: &UmbralFunction,
    tolerance: f64,
) -> Result<QuadratureCheck> {
    let closed = integral_closed_form(order, a, b, c, f)?.numeric_value;
    let integrand = gamma_integrand(order, a, b, c, f);
    let half_period = PI / (2.0 * c.sqrt());
    if order % 2 == 1 {
        let l = 40.0 * half_period;
        let r = integrate(&integrand, -l, l, 80, 1e-3 * tolerance)?;
        return compare(order, closed, r.value, r.error_estimate, tolerance);
    }
    let r = integrate_oscillatory_tail(&integrand, 0.0, half_period, 600, 1e-3 * tolerance)?;
    compare(order, closed, 2.0 * r.value, 2.0 * r.error_estimate, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::ratio;
    use crate::umbral_func::{builtin, Builtin};
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_examples() {
        let exp = builtin(Builtin::Exp).unwrap();
        assert_eq!(integral_closed_form(1, 0.3, 2.0, 1.0, &exp).unwrap().numeric_value, 0.0);
        let r = integral_closed_form_exact(2, &int(0), &int(1), &int(1), &exp).unwrap();
        assert_eq!(r.exact_part, Some(HalfIntegerGamma::sqrt_pi(int(2))));
        assert_relative_eq!(r.numeric_value, 2.0 * PI.sqrt(), max_relative = 1e-15);
        assert_eq!(r.exact_part.unwrap().to_string(), "2·√π");

        let bessel = builtin(Builtin::BesselVacuum).unwrap();
        let r = integral_closed_form_exact(2, &int(1), &int(1), &ratio(1, 4), &bessel).unwrap();
        assert_eq!(r.exact_part, Some(HalfIntegerGamma::rational(int(16))));
        assert_relative_eq!(integral_closed_form(2, 1.0, 1.0, 0.25, &bessel).unwrap().numeric_value, 16.0, max_relative = 1e-13);
        // √2 is irrational: no exact part
        assert!(integral_closed_form_exact(2, &int(1), &int(1), &int(2), &exp).unwrap().exact_part.is_none());
    }

    #[test]
    fn closed_form_errors() {
        let exp = builtin(Builtin::Exp).unwrap();
        assert!(matches!(integral_closed_form(2, 1.0, 1.0, 0.0, &exp), Err(Error::Domain(_))));
        assert!(matches!(integral_closed_form(2, 1.0, 1.0, -1.0, &exp), Err(Error::Domain(_))));
        assert!(integral_closed_form(0, 1.0, 1.0, 1.0, &exp).is_err());
        let whole = builtin(Builtin::GaussianExp(-1.0)).unwrap();
        assert!(matches!(integral_closed_form(2, 1.0, 1.0, 1.0, &whole), Err(Error::KindMismatch { .. })));
        let c0 = builtin(Builtin::Tricomi(0.0)).unwrap();
        assert!(matches!(integral_closed_form(2, 1.0, 1.0, 1.0, &c0), Err(Error::KindMismatch { .. })));
    }

    #[test]
    fn bessel_display_examples() {
        assert_relative_eq!(bessel_j0_gamma_integral(1, 0.0, 1.0).unwrap(), 8.0, max_relative = 1e-15);
        assert_relative_eq!(bessel_j0_gamma_integral(1, 1.0, 0.0).unwrap(), 8.0, max_relative = 1e-15);
        assert_relative_eq!(bessel_j0_gamma_integral(2, 1.0, 1.0).unwrap(), 128.0, max_relative = 1e-15);
        assert_eq!(bessel_j0_gamma_integral_exact(2, &int(1), &int(1)).unwrap(), int(128));
        assert!(bessel_j0_gamma_integral(0, 1.0, 1.0).is_err());
        let bessel = builtin(Builtin::BesselVacuum).unwrap();
        for n in 1..=4u32 {
            for (a, b) in [(ratio(1, 2), int(1)), (int(-2), ratio(3, 4))] {
                let display = bessel_j0_gamma_integral_exact(n, &a, &b).unwrap();
                let general = integral_closed_form_exact(2 * n, &a, &b, &ratio(1, 4), &bessel).unwrap();
                assert_eq!(general.exact_part, Some(HalfIntegerGamma::rational(display)));
            }
        }
    }

    #[test]
    fn gaussian_quadrature_examples() {
        let exp = builtin(Builtin::Exp).unwrap();
        assert!(quadrature_check(2, 0.0, 1.0, 1.0, &exp, Some(10.0), 1e-8).unwrap().passed);
        assert!(quadrature_check(3, 0.7, -0.4, 1.0, &exp, None, 1e-8).unwrap().passed);
        let r = quadrature_check(4, 1.0, 0.5, 1.0, &exp, None, 1e-8).unwrap();
        assert!(r.passed, "{r:?}");
        for order in [2, 4, 6] {
            let r = quadrature_check(order, -1.5, 0.75, 0.25, &exp, None, 1e-9).unwrap();
            assert!(r.passed, "order {order}: {r:?}");
        }
    }

    #[test]
    fn bessel_quadrature_examples() {
        let bessel = builtin(Builtin::BesselVacuum).unwrap();
        // ∫ 4 J₂ = 8 and ∫ 4 J₁/x = 8
        for (a, b) in [(1.0, 0.0), (0.0, 1.0)] {
            let r = oscillatory_quadrature_check(2, a, b, 0.25, &bessel, 1e-7).unwrap();
            assert!(r.passed, "a={a} b={b}: {r:?}");
            assert_relative_eq!(r.quadrature, 8.0, max_relative = 1e-7);
        }
        let r = oscillatory_quadrature_check(3, 1.0, 1.0, 0.25, &bessel, 1e-8).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
