//! Comb and generalized comb (GCF) transfer functions and impulse responses.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GcfError, Result};
use crate::poly::{
    convolve, convolve_complex, divide_complex, interpolate_unit_circle, RealPolynomial,
};

/// Imaginary residue accepted as "real" after DC normalization.
pub const REAL_TOLERANCE: f64 = 1e-10;

/// Optimal zero rotations q_p for orders 3..=6 (first N entries feed H1,
/// the remaining ⌊N/2⌋ feed H2).
const OPTIMAL_ROTATIONS: [&[f64]; 4] = [
    &[-0.79, 0.0, 0.79, 0.79],
    &[-0.35, 0.35, -0.88, 0.88, 0.88, 0.35],
    &[0.55, 0.93, -0.55, -0.93, 0.0, 0.55, 0.93],
    &[0.95, 0.675, 0.25, -0.25, -0.675, -0.95, 0.95, 0.675, 0.25],
];

/// Tabulated optimal rotations for an N-th order GCF, if known.
pub fn optimal_rotations(order: usize) -> Option<&'static [f64]> {
    order
        .checked_sub(3)
        .and_then(|i| OPTIMAL_ROTATIONS.get(i))
        .copied()
}

/// Number of rotation slots an (N, D) GCF needs: N for the H1 products
/// plus ⌊N/2⌋ H2 factors when D is even.
pub fn rotation_slots(order: usize, decimation: usize) -> usize {
    if decimation.is_multiple_of(2) {
        order + order / 2
    } else {
        order
    }
}

/// Parameters of an N-th order GCF decimating by D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcfSpec {
    pub order: usize,
    pub decimation: usize,
    pub rotations: Vec<f64>,
    /// Residual oversampling after the first stage; ρ = ν·D.
    pub nu: usize,
}

impl GcfSpec {
    pub fn new(order: usize, decimation: usize, rotations: Vec<f64>, nu: usize) -> Result<Self> {
        if order == 0 {
            return invalid("filter order must be positive");
        }
        if decimation < 2 {
            return invalid(format!("decimation factor must be >= 2, got {decimation}"));
        }
        if nu < 2 {
            return invalid(format!("residual oversampling nu must be >= 2, got {nu}"));
        }
        let expected = rotation_slots(order, decimation);
        if rotations.len() != expected {
            return Err(GcfError::RotationCount {
                order,
                decimation,
                expected,
                got: rotations.len(),
            });
        }
        if let Some(&q) = rotations.iter().find(|q| q.is_nan() || q.abs() > 1.0) {
            return Err(GcfError::RotationRange(q));
        }
        Ok(Self {
            order,
            decimation,
            rotations,
            nu,
        })
    }

    /// Spec using the tabulated optimal rotations for `order`.
    pub fn optimal(order: usize, decimation: usize, nu: usize) -> Result<Self> {
        let table = optimal_rotations(order).ok_or_else(|| {
            GcfError::InvalidParameter(format!(
                "no tabulated rotations for order {order}; pass them explicitly"
            ))
        })?;
        let slots = rotation_slots(order, decimation);
        Self::new(order, decimation, table[..slots].to_vec(), nu)
    }

    /// Oversampling ratio ρ = ν·D.
    pub fn rho(&self) -> f64 {
        (self.nu * self.decimation) as f64
    }

    /// Normalized band edge f_c = 1/(2ρ).
    pub fn fc(&self) -> f64 {
        1.0 / (2.0 * self.rho())
    }

    /// Rotation angles α_p = q_p·2π·f_c in radians.
    pub fn alphas(&self) -> Vec<f64> {
        let fc = self.fc();
        self.rotations.iter().map(|q| q * 2.0 * PI * fc).collect()
    }
}

/// A causal FIR impulse response, kept both DC-normalized (`taps`) and in
/// the raw scale produced by the recursion (`raw`, with `raw[0] == 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseResponse {
    pub taps: Vec<f64>,
    pub raw: Vec<f64>,
    /// DC gain of the raw response; `taps = raw / gain`.
    pub gain: f64,
}

impl ImpulseResponse {
    pub fn from_raw(raw: Vec<f64>) -> Result<Self> {
        let gain: f64 = raw.iter().sum();
        if raw.is_empty() || gain == 0.0 || !gain.is_finite() {
            return invalid("impulse response must be non-empty with non-zero DC gain");
        }
        let taps = raw.iter().map(|h| h / gain).collect();
        Ok(Self { taps, raw, gain })
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn to_polynomial(&self) -> RealPolynomial {
        RealPolynomial::new(self.taps.clone()).expect("impulse response has non-zero first tap")
    }
}

/// ((1/D)(1 - z^-D)/(1 - z^-1))^N, expanded.
pub fn comb_tf(order: usize, decimation: usize) -> Result<RealPolynomial> {
    if order == 0 {
        return invalid("comb order must be positive");
    }
    if decimation < 2 {
        return invalid(format!("decimation factor must be >= 2, got {decimation}"));
    }
    let boxcar = vec![1.0; decimation];
    let mut acc = vec![1.0];
    for _ in 0..order {
        acc = convolve(&acc, &boxcar);
    }
    RealPolynomial::normalized(acc)
}

/// Expanded, DC-normalized H_GCF_N(z) built from its real quadratic factors.
pub fn gcf_tf(spec: &GcfSpec) -> Result<RealPolynomial> {
    let spec = GcfSpec::new(spec.order, spec.decimation, spec.rotations.clone(), spec.nu)?;
    let n = spec.order;
    let d = spec.decimation;
    if spec.rotations.iter().all(|q| *q == 0.0) {
        return comb_tf(n, d);
    }
    let alphas = spec.alphas();
    let even = d % 2 == 0;
    let d_m = if even { d / 2 - 1 } else { (d - 1) / 2 };

    let mut factors: Vec<f64> = Vec::new();
    for i in 1..=d_m {
        let base = 2.0 * PI * i as f64 / d as f64;
        factors.extend(alphas[..n].iter().map(|alpha| -2.0 * (base - alpha).cos()));
    }
    if even {
        factors.extend(alphas[n..].iter().map(|alpha| -2.0 * (PI - alpha).cos()));
    }
    let linear = even && n % 2 == 1;
    let len = 2 * factors.len() + usize::from(linear) + 1;
    let eval = |x: Complex64| {
        let mut h: Complex64 = factors.iter().map(|b| 1.0 + x * (b + x)).product();
        if linear {
            h *= 1.0 + x;
        }
        h
    };
    let dc = eval(Complex64::new(1.0, 0.0)).re;
    let mut taps = interpolate_unit_circle(len, |x| eval(x) / dc);
    // Every factor is palindromic; enforce it on the rounded taps.
    for i in 0..len / 2 {
        let mean = 0.5 * (taps[i] + taps[len - 1 - i]);
        taps[i] = mean;
        taps[len - 1 - i] = mean;
    }
    RealPolynomial::normalized(taps)
}

fn check_alpha(decimation: usize, alpha: f64) -> Result<()> {
    if decimation < 2 {
        return invalid(format!("decimation factor must be >= 2, got {decimation}"));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return invalid(format!(
            "rotation angle must be finite and >= 0, got {alpha}"
        ));
    }
    Ok(())
}

/// Third-order GCF by direct complex multiplication of the three numerator
/// factors and long division by the three denominator factors.
pub fn gcf3_tf_oracle(decimation: usize, alpha: f64) -> Result<RealPolynomial> {
    check_alpha(decimation, alpha)?;
    let d = decimation;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);

    let num_factor = |rot: Complex64| {
        let mut f = vec![zero; d + 1];
        f[0] = one;
        f[d] = -rot;
        f
    };
    let rot_d = Complex64::from_polar(1.0, alpha * d as f64);
    let num = convolve_complex(
        &convolve_complex(&num_factor(one), &num_factor(rot_d)),
        &num_factor(rot_d.conj()),
    );

    // One linear denominator factor at a time: each division is a first-order
    // running sum, which keeps rounding growth linear in the length.
    let rot = Complex64::from_polar(1.0, alpha);
    let mut quotient = num;
    for root in [one, rot, rot.conj()] {
        quotient = divide_complex(&quotient, &[one, -root], 1e-9)?;
    }
    let gain: Complex64 = quotient.iter().sum();
    let residue = quotient
        .iter()
        .map(|c| (c / gain).im.abs())
        .fold(gain.im.abs() / gain.norm(), f64::max);
    if residue > REAL_TOLERANCE {
        return Err(GcfError::ImaginaryResidue(residue));
    }
    RealPolynomial::normalized(quotient.iter().map(|c| c.re).collect())
}

/// The raw (un-normalized) third-order GCF impulse response from the nested
/// summation h(n) = e^{jαn} Σ_{k3≤n} e^{-2jαk3} Σ_{k2≤k3} e^{jαk2} Σ_{k1≤k2} x_t(k1),
/// n = 0..=3D-3, where x_t is the numerator impulse train.
pub fn gcf3_impulse_raw(decimation: usize, alpha: f64) -> Result<Vec<f64>> {
    check_alpha(decimation, alpha)?;
    let d = decimation;
    let len = 3 * d - 2;
    let r = 1.0 + 2.0 * (alpha * d as f64).cos();

    let x_t = |n: usize| -> f64 {
        match n {
            0 => 1.0,
            _ if n == d => -r,
            _ if n == 2 * d => r,
            _ if n == 3 * d => -1.0,
            _ => 0.0,
        }
    };

    // Running values of the three nested sums, advanced one index at a time.
    let mut inner = 0.0;
    let mut middle = Complex64::new(0.0, 0.0);
    let mut outer = Complex64::new(0.0, 0.0);
    let mut taps = Vec::with_capacity(len);
    let mut max_residue: f64 = 0.0;
    for n in 0..len {
        let k = n as f64;
        inner += x_t(n);
        middle += Complex64::from_polar(1.0, alpha * k) * inner;
        outer += Complex64::from_polar(1.0, -2.0 * alpha * k) * middle;
        let h = Complex64::from_polar(1.0, alpha * k) * outer;
        max_residue = max_residue.max(h.im.abs());
        taps.push(h.re);
    }
    let gain: f64 = taps.iter().sum();
    let residue = max_residue / gain.abs();
    if residue > REAL_TOLERANCE {
        return Err(GcfError::ImaginaryResidue(residue));
    }
    Ok(taps)
}

/// DC-normalized third-order GCF impulse response (3D-2 taps).
pub fn gcf3_impulse(decimation: usize, alpha: f64) -> Result<ImpulseResponse> {
    ImpulseResponse::from_raw(gcf3_impulse_raw(decimation, alpha)?)
}
