//! Numeric integration: panel-wise double-exponential quadrature on finite
//! intervals, and Wynn-accelerated panel sums for slowly decaying
//! oscillatory tails on `[start, ∞)`.

use quadrature::double_exponential;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u32,
}

/// `∫ₐᵇ f` split into `panels` equal pieces, each to absolute tolerance
/// `abs_tol / panels`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, abs_tol: f64) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) || panels == 0 {
        return Err(Error::Quadrature(format!("bad interval [{a}, {b}] or panel count {panels}")));
    }
    let width = (b - a) / panels as f64;
    let mut out = QuadratureResult { value: 0.0, error_estimate: 0.0, evaluations: 0 };
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        let r = double_exponential::integrate(&f, lo, hi, abs_tol / panels as f64);
        out.value += r.integral;
        out.error_estimate += r.error_estimate;
        out.evaluations += r.num_function_evaluations;
    }
    if !out.value.is_finite() {
        return Err(Error::Quadrature("integrand produced a non-finite value".into()));
    }
    Ok(out)
}

/// The last even-column entry of Wynn's ε-table for a sequence of partial sums.
pub fn wynn_epsilon(partial_sums: &[f64]) -> f64 {
    let n = partial_sums.len();
    if n < 3 {
        return partial_sums.last().copied().unwrap_or(0.0);
    }
    // prev = ε_{k−1}, cur = ε_k, column by column.
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = partial_sums.to_vec();
    let mut best = *partial_sums.last().unwrap();
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == 0.0 {
                return cur[i + 1];
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        prev = cur;
        cur = next;
        k += 1;
        if k % 2 == 0 {
            best = *cur.last().unwrap();
        }
    }
    best
}

/// `∫_start^∞ f` for integrands oscillating with half-period `half_period`
/// whose amplitude decays only algebraically. Panels of one half-period are
/// integrated in turn and the partial sums are accelerated; the routine stops
/// once two consecutive accelerated estimates agree to `rel_tol`.
pub fn integrate_oscillatory_tail<F: Fn(f64) -> f64>(
    f: F,
    start: f64,
    half_period: f64,
    max_panels: usize,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    let mut partial = Vec::with_capacity(max_panels);
    let mut acc = 0.0;
    let mut evaluations = 0;
    let mut last_estimate: Option<f64> = None;
    let mut agreements = 0;
    for i in 0..max_panels {
        let lo = start + half_period * i as f64;
        let r = double_exponential::integrate(&f, lo, lo + half_period, 1e-15);
        acc += r.integral;
        evaluations += r.num_function_evaluations;
        partial.push(acc);
        if partial.len() >= 12 {
            // keep the table to the most recent panels, where the tail is regular
            let window = &partial[partial.len().saturating_sub(30)..];
            let estimate = wynn_epsilon(window);
            if let Some(prev) = last_estimate {
                if (estimate - prev).abs() <= rel_tol * estimate.abs().max(1e-300) {
                    agreements += 1;
                    if agreements >= 3 {
                        return Ok(QuadratureResult { value: estimate, error_estimate: (estimate - prev).abs(), evaluations });
                    }
                } else {
                    agreements = 0;
                }
            }
            last_estimate = Some(estimate);
        }
    }
    Err(Error::NonConvergence(format!(
        "oscillatory tail did not settle within {max_panels} panels"
    )))
}
