//! Bounded-error rounding and greedy power-of-two expansion of coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::polyphase::{split, CascadeSpec};
use crate::sensitivity::PerturbationConfig;

/// Approximated coefficients with their exact errors: values = original + deltas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedCoefficientSet {
    pub values: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Largest |delta| actually incurred.
    pub max_abs_error: f64,
    /// Rounding grid spacing.
    pub step: f64,
}

/// Largest power of two not above `limit` (> 0).
fn po2_floor(limit: f64) -> f64 {
    let mut step = 2f64.powi(limit.log2().floor() as i32);
    while step > limit {
        step /= 2.0;
    }
    while step * 2.0 <= limit {
        step *= 2.0;
    }
    step
}

/// Rounds every coefficient to the nearest multiple of the largest power of
/// two not exceeding 2·eps (ties away from zero), so |Δ| ≤ eps. The grid is
/// binary, which keeps every Δ and the reconstruction exact.
pub fn round_to_error(coeffs: &[f64], eps: f64) -> Result<QuantizedCoefficientSet> {
    if !eps.is_finite() || eps <= 0.0 {
        return invalid(format!("eps must be positive and finite, got {eps}"));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return invalid("coefficients must be finite");
    }
    let step = po2_floor(2.0 * eps);
    let values: Vec<f64> = coeffs.iter().map(|c| (c / step).round() * step).collect();
    let deltas: Vec<f64> = values.iter().zip(coeffs).map(|(v, c)| v - c).collect();
    let max_abs_error = deltas.iter().map(|d| d.abs()).fold(0.0, f64::max);
    Ok(QuantizedCoefficientSet {
        values,
        deltas,
        max_abs_error,
        step,
    })
}

/// Rounds the raw polyphase taps and stage multipliers of a structure and
/// returns the resulting coefficient errors.
pub fn quantized_perturbation(spec: &CascadeSpec, eps: f64) -> Result<PerturbationConfig> {
    let raw = split(spec)?.h_p.raw;
    let hp = round_to_error(&raw, eps)?;
    let r = round_to_error(&spec.stage_multipliers(), eps)?;
    PerturbationConfig::from_taps(spec, &hp.deltas, &r.deltas)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Po2Term {
    /// +1 or -1.
    pub sign: i8,
    pub exponent: i32,
}

impl Po2Term {
    pub fn value(&self) -> f64 {
        f64::from(self.sign) * 2f64.powi(self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Po2Expansion {
    pub terms: Vec<Po2Term>,
    /// Σ terms.
    pub value: f64,
    /// value - x.
    pub error: f64,
    /// Whether |error| ≤ eps was reached within the term budget.
    pub met: bool,
}

/// Greedy signed power-of-two expansion: each term is the power of two
/// nearest the remaining residual (ties to the smaller one).
pub fn po2_expand(x: f64, max_terms: usize, eps: f64) -> Result<Po2Expansion> {
    if !x.is_finite() || x.abs() >= 4.0 {
        return invalid(format!("|x| must be below 4, got {x}"));
    }
    if max_terms == 0 {
        return invalid("max_terms must be >= 1");
    }
    if eps.is_nan() || eps < 0.0 {
        return invalid(format!("eps must be >= 0, got {eps}"));
    }
    let mut terms = Vec::new();
    let mut residual = x;
    while terms.len() < max_terms && residual.abs() > eps && residual != 0.0 {
        let mag = residual.abs();
        let lower = po2_floor(mag);
        let pick = if 2.0 * lower - mag < mag - lower {
            2.0 * lower
        } else {
            lower
        };
        let sign: i8 = if residual > 0.0 { 1 } else { -1 };
        terms.push(Po2Term {
            sign,
            exponent: pick.log2().round() as i32,
        });
        residual -= f64::from(sign) * pick;
    }
    let value: f64 = terms.iter().map(Po2Term::value).sum();
    Ok(Po2Expansion {
        terms,
        value,
        error: value - x,
        met: residual.abs() <= eps,
    })
}
