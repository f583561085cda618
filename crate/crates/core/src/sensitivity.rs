//! Frequency responses of the partial polyphase structure and its
//! first-order sensitivity to approximated multipliers.
//!
//! Perturbations act on the raw coefficients of the structure: the
//! polyphase taps h_P(n) as produced by the recursion (h_P(0) = 1) and the
//! stage multipliers r_u. The output normalization stays at its nominal
//! value, as it would in a fixed datapath.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GcfError, Result};
use crate::exec::Execution;
use crate::poly::{eval_at_inverse, RealPolynomial};
use crate::polyphase::{split, CascadeSpec, Stage};

/// Magnitude below which a response or denominator counts as a null.
pub const NULL_TOLERANCE: f64 = 1e-12;

/// Default number of uniformly spaced grid points on [0, 0.5].
pub const DEFAULT_GRID_POINTS: usize = 8192;

/// Strictly increasing digital frequencies in [0, 0.5].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return invalid("frequency grid is empty");
        }
        if points.iter().any(|f| !(0.0..=0.5).contains(f)) {
            return invalid("grid frequencies must lie in [0, 0.5]");
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("grid frequencies must be strictly increasing");
        }
        Ok(Self { points })
    }

    /// `n` evenly spaced points from 0 to 0.5 inclusive.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return invalid("a uniform grid needs at least two points");
        }
        let step = 0.5 / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
        points[n - 1] = 0.5;
        Self::new(points)
    }

    /// Uniform grid plus the folding-band edges k/D ± f_c (and f_c itself).
    pub fn with_folding_edges(n: usize, decimation: usize, fc: f64) -> Result<Self> {
        let mut points = Self::uniform(n)?.points;
        points.push(fc);
        for k in 1..=decimation / 2 {
            let center = k as f64 / decimation as f64;
            points.extend([center - fc, center + fc]);
        }
        points.retain(|f| (0.0..=0.5).contains(f));
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of grid points inside the closed interval [lo, hi].
    pub fn indices_in(&self, lo: f64, hi: f64) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&i| self.points[i] >= lo && self.points[i] <= hi)
            .collect()
    }
}

/// Errors on the polyphase coefficients and stage multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    /// Δc_{n,k} stored as `delta_c[k][n]`, the layout of the polyphase bank.
    pub delta_c: Vec<Vec<f64>>,
    /// Δr_u for u = pp+1 .. p-1.
    pub delta_r: Vec<f64>,
}

impl PerturbationConfig {
    pub fn zero(spec: &CascadeSpec) -> Self {
        Self::from_taps(
            spec,
            &vec![0.0; spec.polyphase_len()],
            &vec![0.0; spec.cascade_indices().len()],
        )
        .expect("shapes follow the cascade layout")
    }

    /// The same error on every polyphase coefficient and every multiplier.
    pub fn uniform(spec: &CascadeSpec, delta_h: f64, delta_r: f64) -> Self {
        Self::from_taps(
            spec,
            &vec![delta_h; spec.polyphase_len()],
            &vec![delta_r; spec.cascade_indices().len()],
        )
        .expect("shapes follow the cascade layout")
    }

    /// Builds the config from per-tap errors Δh_P(η), η = D1·n + k.
    pub fn from_taps(spec: &CascadeSpec, delta_h: &[f64], delta_r: &[f64]) -> Result<Self> {
        let len = spec.polyphase_len();
        if delta_h.len() != len {
            return Err(GcfError::LengthMismatch {
                expected: len,
                got: delta_h.len(),
            });
        }
        let d1 = spec.d1();
        let inner = len.div_ceil(d1);
        let delta_c = (0..d1)
            .map(|k| {
                (0..inner)
                    .map(|n| delta_h.get(d1 * n + k).copied().unwrap_or(0.0))
                    .collect()
            })
            .collect();
        let cfg = Self {
            delta_c,
            delta_r: delta_r.to_vec(),
        };
        cfg.validate(spec)?;
        Ok(cfg)
    }

    pub fn validate(&self, spec: &CascadeSpec) -> Result<()> {
        let d1 = spec.d1();
        let len = spec.polyphase_len();
        let inner = len.div_ceil(d1);
        if self.delta_c.len() != d1 {
            return Err(GcfError::LengthMismatch {
                expected: d1,
                got: self.delta_c.len(),
            });
        }
        for (k, row) in self.delta_c.iter().enumerate() {
            if row.len() != inner {
                return Err(GcfError::LengthMismatch {
                    expected: inner,
                    got: row.len(),
                });
            }
            for (n, &v) in row.iter().enumerate() {
                if d1 * n + k >= len && v != 0.0 {
                    return invalid(format!("Δc[{n},{k}] lies outside the {len} polyphase taps"));
                }
            }
        }
        let stages = spec.cascade_indices().len();
        if self.delta_r.len() != stages {
            return Err(GcfError::LengthMismatch {
                expected: stages,
                got: self.delta_r.len(),
            });
        }
        Ok(())
    }

    /// Per-tap errors Δh_P(η), η = 0 .. 3·D1-3.
    pub fn delta_taps(&self, spec: &CascadeSpec) -> Vec<f64> {
        let d1 = spec.d1();
        (0..spec.polyphase_len())
            .map(|eta| self.delta_c[eta % d1][eta / d1])
            .collect()
    }
}

/// H(e^{j2πf}) over the grid.
pub fn freq_response(tf: &RealPolynomial, grid: &FrequencyGrid) -> Vec<Complex64> {
    freq_response_with(tf, grid, Execution::default())
}

pub fn freq_response_with(
    tf: &RealPolynomial,
    grid: &FrequencyGrid,
    exec: Execution,
) -> Vec<Complex64> {
    exec.map(grid.points(), |&f| tf.eval_freq(2.0 * PI * f))
}

fn stage_factor(u: u32, r: f64, omega: f64) -> Complex64 {
    let half = (1u64 << u) as f64 * omega / 2.0;
    Complex64::from_polar(2.0, -3.0 * half) * ((3.0 * half).cos() + r * half.cos())
}

/// Closed-form H_N(e^{jω}) = Π_u 2e^{-j3·2^{u-1}ω}[cos(3·2^{u-1}ω) + r_u cos(2^{u-1}ω)]
/// (un-normalized, full-rate ω).
pub fn hn_freq_response(spec: &CascadeSpec, grid: &FrequencyGrid) -> Result<Vec<Complex64>> {
    let multipliers = spec.stage_multipliers();
    if multipliers.is_empty() {
        return Err(GcfError::EmptyCascade);
    }
    let indices: Vec<u32> = spec.cascade_indices().collect();
    Ok(Execution::default().map(grid.points(), |&f| {
        let omega = 2.0 * PI * f;
        indices
            .iter()
            .zip(&multipliers)
            .map(|(&u, &r)| stage_factor(u, r, omega))
            .product()
    }))
}

/// The error functions ΔH1 (polyphase coefficients) and ΔH2,u (one per
/// stage multiplier). Flagged samples are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTerms {
    pub dh1: Vec<Complex64>,
    pub dh2: Vec<Vec<Complex64>>,
    /// Stage index u for each entry of `dh2`.
    pub stage_indices: Vec<u32>,
}

impl ErrorTerms {
    /// ΔH = ΔH1 + Σ_u ΔH2,u.
    pub fn total(&self) -> Vec<Complex64> {
        (0..self.dh1.len())
            .map(|i| self.dh1[i] + self.dh2.iter().map(|t| t[i]).sum::<Complex64>())
            .collect()
    }
}

fn flagged() -> Complex64 {
    Complex64::new(f64::NAN, f64::NAN)
}

/// True for samples emitted at divergence points.
pub fn is_flagged(z: &Complex64) -> bool {
    !z.re.is_finite() || !z.im.is_finite()
}

/// First-order error function of the structure under `pert`.
pub fn error_function(
    spec: &CascadeSpec,
    pert: &PerturbationConfig,
    grid: &FrequencyGrid,
) -> Result<ErrorTerms> {
    error_function_with(spec, pert, grid, Execution::default())
}

pub fn error_function_with(
    spec: &CascadeSpec,
    pert: &PerturbationConfig,
    grid: &FrequencyGrid,
    exec: Execution,
) -> Result<ErrorTerms> {
    pert.validate(spec)?;
    let parts = split(spec)?;
    let raw = parts.h_p.raw;
    let delta = pert.delta_taps(spec);

    let dh1 = exec.map(grid.points(), |&f| {
        let x = Complex64::from_polar(1.0, -2.0 * PI * f);
        let hp = eval_at_inverse(&raw, x);
        if hp.norm() < NULL_TOLERANCE {
            return flagged();
        }
        eval_at_inverse(&delta, x) / hp
    });

    let stage_indices: Vec<u32> = spec.cascade_indices().collect();
    let multipliers = spec.stage_multipliers();
    let dh2 = stage_indices
        .iter()
        .zip(multipliers.iter().zip(&pert.delta_r))
        .map(|(&u, (&r, &dr))| {
            exec.map(grid.points(), |&f| {
                let half = (1u64 << u) as f64 * PI * f;
                let den = (3.0 * half).cos() + r * half.cos();
                if den.abs() < NULL_TOLERANCE {
                    return flagged();
                }
                Complex64::new(half.cos() * dr / den, 0.0)
            })
        })
        .collect();
    Ok(ErrorTerms {
        dh1,
        dh2,
        stage_indices,
    })
}

/// Rebuilt sections of a (possibly perturbed) structure, evaluated by
/// polynomial evaluation of their coefficient arrays.
struct Sections {
    hp_raw: Vec<f64>,
    hp_delta: Vec<f64>,
    stages: Vec<Stage>,
    delta_r: Vec<f64>,
    scale: f64,
}

impl Sections {
    fn build(spec: &CascadeSpec, pert: &PerturbationConfig) -> Result<Self> {
        pert.validate(spec)?;
        let parts = split(spec)?;
        let stages = parts.full_rate_stages(spec);
        let scale = 1.0 / (parts.h_p.gain * stages.iter().map(Stage::dc_gain).product::<f64>());
        Ok(Self {
            hp_delta: pert.delta_taps(spec),
            hp_raw: parts.h_p.raw,
            stages,
            delta_r: pert.delta_r.clone(),
            scale,
        })
    }

    /// (nominal, delta) pairs per section at one frequency.
    fn factors(&self, f: f64) -> Vec<(Complex64, Complex64)> {
        let x = Complex64::from_polar(1.0, -2.0 * PI * f);
        let mut out = Vec::with_capacity(1 + self.stages.len());
        out.push((
            eval_at_inverse(&self.hp_raw, x),
            eval_at_inverse(&self.hp_delta, x),
        ));
        for (s, &dr) in self.stages.iter().zip(&self.delta_r) {
            let xm = x.powu(s.delay as u32);
            out.push((eval_at_inverse(&s.base_taps(), xm), dr * (xm + xm * xm)));
        }
        out
    }
}

/// Nominal DC-normalized response H_P·H_N of the structure.
pub fn nominal_response(spec: &CascadeSpec, grid: &FrequencyGrid) -> Result<Vec<Complex64>> {
    perturbed_response(spec, &PerturbationConfig::zero(spec), grid)
}

/// Exact response of the structure rebuilt with c + Δc and r + Δr, keeping
/// the nominal output scale.
pub fn perturbed_response(
    spec: &CascadeSpec,
    pert: &PerturbationConfig,
    grid: &FrequencyGrid,
) -> Result<Vec<Complex64>> {
    let sections = Sections::build(spec, pert)?;
    let hp: Vec<f64> = sections
        .hp_raw
        .iter()
        .zip(&sections.hp_delta)
        .map(|(h, d)| h + d)
        .collect();
    let stages: Vec<Vec<f64>> = sections
        .stages
        .iter()
        .zip(&sections.delta_r)
        .map(|(s, dr)| {
            Stage {
                multiplier: s.multiplier + dr,
                ..*s
            }
            .taps()
        })
        .collect();
    Ok(Execution::default().map(grid.points(), |&f| {
        let x = Complex64::from_polar(1.0, -2.0 * PI * f);
        let mut h = eval_at_inverse(&hp, x);
        for taps in &stages {
            h *= eval_at_inverse(taps, x);
        }
        h * sections.scale
    }))
}

/// Exact change H̃ - H of the rebuilt structure, accumulated section by
/// section as Σ_i Π_{j<i}(a_j + δ_j)·δ_i·Π_{j>i} a_j so that O(Δ²) effects
/// survive rounding.
pub fn perturbation_change(
    spec: &CascadeSpec,
    pert: &PerturbationConfig,
    grid: &FrequencyGrid,
) -> Result<Vec<Complex64>> {
    let sections = Sections::build(spec, pert)?;
    Ok(Execution::default().map(grid.points(), |&f| {
        let factors = sections.factors(f);
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..factors.len() {
            let before: Complex64 = factors[..i].iter().map(|(a, d)| a + d).product();
            let after: Complex64 = factors[i + 1..].iter().map(|(a, _)| *a).product();
            total += before * factors[i].1 * after;
        }
        total * sections.scale
    }))
}

/// First-order prediction of the change, H·ΔH. Flagged where ΔH is.
pub fn first_order_change(
    spec: &CascadeSpec,
    pert: &PerturbationConfig,
    grid: &FrequencyGrid,
) -> Result<Vec<Complex64>> {
    let nominal = nominal_response(spec, grid)?;
    let dh = error_function(spec, pert, grid)?.total();
    Ok(nominal.iter().zip(&dh).map(|(h, d)| h * d).collect())
}

/// Largest |x| over the given indices, skipping flagged samples.
pub fn max_abs(values: &[Complex64], indices: &[usize]) -> f64 {
    indices
        .iter()
        .map(|&i| values[i])
        .filter(|v| !is_flagged(v))
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}
