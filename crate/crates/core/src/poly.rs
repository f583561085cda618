//! Real FIR transfer functions in ascending powers of z^-1, plus the small
//! amount of complex polynomial arithmetic the oracles need.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GcfError, Result};
use crate::exec::Execution;

/// A real FIR transfer function; `coeffs[k]` multiplies z^-k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPolynomial {
    coeffs: Vec<f64>,
}

impl RealPolynomial {
    /// Wraps coefficients, rejecting an empty list, a zero leading
    /// coefficient or non-finite entries.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("polynomial needs at least one coefficient");
        }
        if coeffs[0] == 0.0 {
            return invalid("leading coefficient (z^0) must be non-zero");
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return invalid("polynomial coefficients must be finite");
        }
        Ok(Self { coeffs })
    }

    /// Builds the polynomial and scales it to unit DC gain.
    pub fn normalized(coeffs: Vec<f64>) -> Result<Self> {
        let mut p = Self::new(coeffs)?;
        let dc = p.dc_gain();
        if dc == 0.0 || !dc.is_finite() {
            return invalid("cannot normalize a polynomial with zero DC gain");
        }
        p.coeffs.iter_mut().for_each(|c| *c /= dc);
        Ok(p)
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// H(1), the sum of the coefficients.
    pub fn dc_gain(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    /// H(z) evaluated at z = e^{jω}.
    pub fn eval_freq(&self, omega: f64) -> Complex64 {
        eval_at_inverse(&self.coeffs, Complex64::from_polar(1.0, -omega))
    }

    /// H(z) evaluated at an arbitrary non-zero z.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        eval_at_inverse(&self.coeffs, z.inv())
    }

    pub fn convolve(&self, other: &RealPolynomial) -> RealPolynomial {
        RealPolynomial {
            coeffs: convolve(&self.coeffs, &other.coeffs),
        }
    }

    /// True when `coeffs[n] == coeffs[len-1-n]` within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.coeffs.len();
        (0..n / 2).all(|i| (self.coeffs[i] - self.coeffs[n - 1 - i]).abs() <= tol)
    }
}

/// Horner evaluation of Σ c_k x^k with x = z^-1.
pub(crate) fn eval_at_inverse(coeffs: &[f64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

pub(crate) fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub(crate) fn convolve_complex(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact power-series division of `num` by `den` (both ascending in z^-1,
/// `den[0] != 0`). Returns the quotient of length `num.len() - den.len() + 1`
/// and fails if the remainder exceeds `tol` relative to the largest
/// quotient coefficient.
pub(crate) fn divide_complex(
    num: &[Complex64],
    den: &[Complex64],
    tol: f64,
) -> Result<Vec<Complex64>> {
    if den.is_empty() || den[0].norm() == 0.0 || num.len() < den.len() {
        return invalid("polynomial division needs den[0] != 0 and deg(num) >= deg(den)");
    }
    let qlen = num.len() - den.len() + 1;
    let mut rem = num.to_vec();
    let mut q = vec![Complex64::new(0.0, 0.0); qlen];
    for n in 0..qlen {
        let c = rem[n] / den[0];
        q[n] = c;
        for (k, &d) in den.iter().enumerate() {
            rem[n + k] -= c * d;
        }
    }
    let scale = q.iter().map(|c| c.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let residue = rem[qlen..].iter().map(|c| c.norm()).fold(0.0, f64::max) / scale;
    if residue > tol {
        return Err(GcfError::NonZeroRemainder(residue));
    }
    Ok(q)
}

/// Real coefficients c_0..c_{len-1} of a polynomial in x = z^-1 of degree
/// below `len`, recovered from its values at x = e^{-j2πk/len} by an inverse
/// DFT. Stable for long products whose partial expansions would overflow
/// the working precision.
pub(crate) fn interpolate_unit_circle<F>(len: usize, eval: F) -> Vec<f64>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let twiddle: Vec<Complex64> = (0..len)
        .map(|m| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / len as f64))
        .collect();
    let values = Execution::default().map(&twiddle, |w| eval(w.conj()));
    Execution::default().map_range(len, |n| {
        let sum: Complex64 = values
            .iter()
            .enumerate()
            .map(|(k, v)| v * twiddle[(k * n) % len])
            .sum();
        sum.re / len as f64
    })
}

/// Inserts `delay - 1` zeros between taps: P(z) -> P(z^delay).
pub(crate) fn upsample_taps(taps: &[f64], delay: usize) -> Vec<f64> {
    if taps.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; (taps.len() - 1) * delay + 1];
    for (i, &t) in taps.iter().enumerate() {
        out[i * delay] = t;
    }
    out
}
