//! Nominal zeros of H_P and H_N and their first-order displacement under
//! coefficient and multiplier errors.
//!
//! Both sections are treated at the input rate: H_P(z) = Π(1 - z_k z^-1) is
//! the raw recursion output (h_P(0) = 1) and stage u of H_N is
//! 1 + r_u(z^-m + z^-2m) + z^-3m with m = 2^u.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GcfError, Result};
use crate::exec::Execution;
use crate::filter::GcfSpec;
use crate::poly::{eval_at_inverse, RealPolynomial};
use crate::polyphase::{split, CascadeSpec};
use crate::roots::{match_points, polynomial_roots};

/// Below this magnitude a derivative marks a repeated zero.
pub const DEGENERATE_TOLERANCE: f64 = 1e-12;

/// Zeros closer than this are counted as one repeated zero.
const MULTIPLICITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Hp,
    Hn,
    Full,
}

/// Zeros listed one per entry (repeated zeros appear repeatedly) with the
/// multiplicity of each entry within the set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub section: Section,
    pub zeros: Vec<Complex64>,
    pub multiplicities: Vec<usize>,
    /// For H_N zeros, the stage index u each zero belongs to.
    pub stages: Option<Vec<u32>>,
}

impl ZeroSet {
    pub fn new(section: Section, zeros: Vec<Complex64>) -> Self {
        let multiplicities = zeros
            .iter()
            .map(|z| {
                zeros
                    .iter()
                    .filter(|w| (*w - z).norm() < MULTIPLICITY_TOLERANCE)
                    .count()
            })
            .collect();
        Self {
            section,
            zeros,
            multiplicities,
            stages: None,
        }
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Largest | |z| - 1 | over the set.
    pub fn max_circle_distance(&self) -> f64 {
        self.zeros
            .iter()
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Designed zeros of a GCF: e^{±j(2πi/D - α_n)} for i = 1..D_M, plus
/// e^{±j(π - α_{N+n})} and, for even D with odd N, z = -1.
pub fn nominal_zeros_gcf(spec: &GcfSpec) -> Result<ZeroSet> {
    let spec = GcfSpec::new(spec.order, spec.decimation, spec.rotations.clone(), spec.nu)?;
    let (n, d) = (spec.order, spec.decimation);
    let alphas = spec.alphas();
    let even = d % 2 == 0;
    let d_m = if even { d / 2 - 1 } else { (d - 1) / 2 };
    let mut zeros = Vec::with_capacity(n * (d - 1));
    for i in 1..=d_m {
        for a in &alphas[..n] {
            let theta = 2.0 * PI * i as f64 / d as f64 - a;
            zeros.push(Complex64::from_polar(1.0, theta));
            zeros.push(Complex64::from_polar(1.0, -theta));
        }
    }
    if even {
        for a in &alphas[n..] {
            zeros.push(Complex64::from_polar(1.0, PI - a));
            zeros.push(Complex64::from_polar(1.0, a - PI));
        }
        if n % 2 == 1 {
            zeros.push(Complex64::new(-1.0, 0.0));
        }
    }
    Ok(ZeroSet::new(Section::Full, zeros))
}

/// The 3·D1 - 3 zeros of H_P: e^{j2πk/D1} and e^{j(2πk/D1 ± α)}, k = 1..D1-1.
pub fn nominal_zeros_hp(spec: &CascadeSpec) -> Result<ZeroSet> {
    let d1 = spec.d1();
    if d1 < 2 {
        return Err(GcfError::InvalidParameter(
            "H_P zeros need D1 >= 2 (pp >= 0)".into(),
        ));
    }
    let mut zeros = Vec::with_capacity(3 * d1 - 3);
    for offset in [0.0, spec.alpha, -spec.alpha] {
        for k in 1..d1 {
            zeros.push(Complex64::from_polar(
                1.0,
                2.0 * PI * k as f64 / d1 as f64 + offset,
            ));
        }
    }
    Ok(ZeroSet::new(Section::Hp, zeros))
}

/// The zeros of every H_N stage: z^m = -1 and z^m = e^{±j(π - 2^u α)}.
pub fn nominal_zeros_hn(spec: &CascadeSpec) -> Result<ZeroSet> {
    let indices: Vec<u32> = spec.cascade_indices().collect();
    if indices.is_empty() {
        return Err(GcfError::EmptyCascade);
    }
    let mut zeros = Vec::new();
    let mut stages = Vec::new();
    for &u in &indices {
        let m = 1usize << u;
        let theta = PI - (1u64 << u) as f64 * spec.alpha;
        for base in [PI, theta, -theta] {
            for k in 0..m {
                zeros.push(Complex64::from_polar(
                    1.0,
                    (base + 2.0 * PI * k as f64) / m as f64,
                ));
                stages.push(u);
            }
        }
    }
    let mut set = ZeroSet::new(Section::Hn, zeros);
    set.stages = Some(stages);
    Ok(set)
}

/// First-order displacement of each H_P zero for per-tap errors Δh_P(η)
/// on the raw coefficients:
/// Δz_i = -Σ_η z_i^{-η} Δh_P(η) / [z_i^{-1} Π_{l≠i}(1 - z_l/z_i)].
pub fn displacement_hp(spec: &CascadeSpec, delta_h: &[f64]) -> Result<Vec<Complex64>> {
    let set = nominal_zeros_hp(spec)?;
    let len = spec.polyphase_len();
    if delta_h.len() != len {
        return Err(GcfError::LengthMismatch {
            expected: len,
            got: delta_h.len(),
        });
    }
    let zeros = &set.zeros;
    let per_zero = Execution::default().map_range(zeros.len(), |i| {
        let zi = zeros[i];
        let deriv: Complex64 = zi.inv()
            * zeros
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != i)
                .map(|(_, zl)| 1.0 - zl / zi)
                .product::<Complex64>();
        if deriv.norm() < DEGENERATE_TOLERANCE {
            return Err(GcfError::DegenerateZero {
                index: i,
                magnitude: deriv.norm(),
            });
        }
        Ok(-eval_at_inverse(delta_h, zi.inv()) / deriv)
    });
    per_zero.into_iter().collect()
}

/// Stage polynomial S(z) = 1 + r(z^-m + z^-2m) + z^-3m, its derivative in z
/// and its derivative in r.
fn stage_terms(m: usize, r: f64, z: Complex64) -> (Complex64, Complex64, Complex64) {
    let w = z.inv();
    let wm = w.powu(m as u32);
    let s = 1.0 + r * (wm + wm * wm) + wm * wm * wm;
    let mf = m as f64;
    let ds_dz = -(mf * r * wm + 2.0 * mf * r * wm * wm + 3.0 * mf * wm * wm * wm) * w;
    (s, ds_dz, wm + wm * wm)
}

/// First-order displacement of each H_N zero for per-stage multiplier
/// errors: Δz_i = -Σ_u (∂H_N/∂r_u)/(∂H_N/∂z) Δr_u at z_i.
pub fn displacement_hn(spec: &CascadeSpec, delta_r: &[f64]) -> Result<Vec<Complex64>> {
    let set = nominal_zeros_hn(spec)?;
    let indices: Vec<u32> = spec.cascade_indices().collect();
    if delta_r.len() != indices.len() {
        return Err(GcfError::LengthMismatch {
            expected: indices.len(),
            got: delta_r.len(),
        });
    }
    let multipliers = spec.stage_multipliers();
    let zeros = &set.zeros;
    let per_zero = Execution::default().map_range(zeros.len(), |i| {
        let terms: Vec<_> = indices
            .iter()
            .zip(&multipliers)
            .map(|(&u, &r)| stage_terms(1 << u, r, zeros[i]))
            .collect();
        let others = |skip: usize| -> Complex64 {
            terms
                .iter()
                .enumerate()
                .filter(|&(v, _)| v != skip)
                .map(|(_, t)| t.0)
                .product()
        };
        let dh_dz: Complex64 = (0..terms.len()).map(|u| terms[u].1 * others(u)).sum();
        if dh_dz.norm() < DEGENERATE_TOLERANCE {
            return Err(GcfError::DegenerateZero {
                index: i,
                magnitude: dh_dz.norm(),
            });
        }
        let dh_dr: Complex64 = (0..terms.len())
            .map(|u| terms[u].2 * others(u) * delta_r[u])
            .sum();
        Ok(-dh_dr / dh_dz)
    });
    per_zero.into_iter().collect()
}

/// Roots of a polynomial in z^-1 by simultaneous iteration.
pub fn root_oracle(tf: &RealPolynomial) -> Result<ZeroSet> {
    Ok(ZeroSet::new(Section::Full, polynomial_roots(tf)?))
}

/// Displacements measured on the roots of the rebuilt polynomial, matched
/// one-to-one to `nominal`.
fn measured_displacement(
    nominal: &[Complex64],
    perturbed: &RealPolynomial,
) -> Result<Vec<Complex64>> {
    let roots = polynomial_roots(perturbed)?;
    let assignment = match_points(nominal, &roots)?;
    Ok(nominal
        .iter()
        .zip(&assignment)
        .map(|(z, &j)| roots[j] - z)
        .collect())
}

/// Roots of the raw H_P rebuilt with h_P + Δh_P, as displacements from the
/// nominal zeros (same order as [`nominal_zeros_hp`]).
pub fn oracle_displacement_hp(spec: &CascadeSpec, delta_h: &[f64]) -> Result<Vec<Complex64>> {
    let nominal = nominal_zeros_hp(spec)?;
    let len = spec.polyphase_len();
    if delta_h.len() != len {
        return Err(GcfError::LengthMismatch {
            expected: len,
            got: delta_h.len(),
        });
    }
    let raw = split(spec)?.h_p.raw;
    let taps: Vec<f64> = raw.iter().zip(delta_h).map(|(h, d)| h + d).collect();
    measured_displacement(&nominal.zeros, &RealPolynomial::new(taps)?)
}

/// The full-rate H_N polynomial with multipliers r_u + Δr_u.
pub fn hn_polynomial(spec: &CascadeSpec, delta_r: &[f64]) -> Result<RealPolynomial> {
    let indices: Vec<u32> = spec.cascade_indices().collect();
    if indices.is_empty() {
        return Err(GcfError::EmptyCascade);
    }
    if delta_r.len() != indices.len() {
        return Err(GcfError::LengthMismatch {
            expected: indices.len(),
            got: delta_r.len(),
        });
    }
    let mut acc = RealPolynomial::one();
    for ((&u, r), dr) in indices.iter().zip(spec.stage_multipliers()).zip(delta_r) {
        let stage = crate::polyphase::Stage {
            index: u,
            multiplier: r + dr,
            delay: 1 << u,
        };
        acc = acc.convolve(&stage.polynomial());
    }
    Ok(acc)
}

/// Roots of H_N rebuilt with r_u + Δr_u, as displacements from the nominal
/// zeros (same order as [`nominal_zeros_hn`]).
pub fn oracle_displacement_hn(spec: &CascadeSpec, delta_r: &[f64]) -> Result<Vec<Complex64>> {
    let nominal = nominal_zeros_hn(spec)?;
    measured_displacement(&nominal.zeros, &hn_polynomial(spec, delta_r)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::gcf3_tf_oracle;

    fn fig_spec() -> CascadeSpec {
        CascadeSpec::new(5, 2, 0.79 * PI / 128.0).unwrap()
    }

    #[test]
    fn trivial_hp_set() {
        let spec = CascadeSpec::new(1, 0, 0.0).unwrap();
        let set = nominal_zeros_hp(&spec).unwrap();
        assert_eq!(set.len(), 3);
        for z in &set.zeros {
            assert!((z + 1.0).norm() < 1e-15);
        }
        assert_eq!(set.multiplicities, vec![3, 3, 3]);
        assert!(nominal_zeros_hp(&CascadeSpec::new(3, -1, 0.1).unwrap()).is_err());
    }

    #[test]
    fn hp_count_law_and_circle() {
        for pp in 0..6 {
            let spec = CascadeSpec::new(6, pp, 0.79 * PI / 256.0).unwrap();
            let set = nominal_zeros_hp(&spec).unwrap();
            assert_eq!(set.len(), 3 * spec.d1() - 3);
            assert!(set.max_circle_distance() < 1e-10);
            assert!(set.multiplicities.iter().all(|&m| m == 1));
        }
    }

    #[test]
    fn hp_zeros_match_root_oracle() {
        let spec = CascadeSpec::new(4, 1, 0.79 * PI / 64.0).unwrap();
        let nominal = nominal_zeros_hp(&spec).unwrap();
        assert_eq!(nominal.len(), 9);
        let roots = root_oracle(&split(&spec).unwrap().h_p.to_polynomial()).unwrap();
        let assignment = match_points(&nominal.zeros, &roots.zeros).unwrap();
        for (z, &j) in nominal.zeros.iter().zip(&assignment) {
            let diff = (roots.zeros[j] / z).arg().abs();
            assert!(diff < 1e-8, "{z} vs {}", roots.zeros[j]);
        }

        let alpha = 0.79 * 2.0 * PI / 64.0;
        let spec8 = CascadeSpec::new(3, 2, alpha).unwrap();
        let roots = root_oracle(&gcf3_tf_oracle(8, alpha).unwrap()).unwrap();
        assert_eq!(roots.len(), 21);
        assert!(roots.max_circle_distance() < 1e-8);
        let nominal = nominal_zeros_hp(&spec8).unwrap();
        let assignment = match_points(&nominal.zeros, &roots.zeros).unwrap();
        for (z, &j) in nominal.zeros.iter().zip(&assignment) {
            assert!((roots.zeros[j] - z).norm() < 1e-8);
        }
    }

    #[test]
    fn hn_zeros_are_stage_roots() {
        let spec = fig_spec();
        let set = nominal_zeros_hn(&spec).unwrap();
        assert_eq!(set.len(), 3 * (8 + 16));
        assert!(set.max_circle_distance() < 1e-10);
        let stages = set.stages.as_ref().unwrap();
        for (z, &u) in set.zeros.iter().zip(stages) {
            let r = crate::polyphase::stage_multiplier(u, spec.alpha);
            let (s, _, _) = stage_terms(1 << u, r, *z);
            assert!(s.norm() < 1e-12);
        }
        assert!(nominal_zeros_hn(&CascadeSpec::new(3, 2, 0.1).unwrap()).is_err());
    }

    #[test]
    fn zero_errors_give_zero_displacement() {
        let spec = fig_spec();
        assert!(displacement_hp(&spec, &[0.0; 22])
            .unwrap()
            .iter()
            .all(|d| d.norm() == 0.0));
        assert!(displacement_hn(&spec, &[0.0; 2])
            .unwrap()
            .iter()
            .all(|d| d.norm() == 0.0));
        assert!(displacement_hp(&spec, &[0.0; 21]).is_err());
        assert!(displacement_hn(&spec, &[0.0; 3]).is_err());
    }

    #[test]
    fn repeated_zeros_are_degenerate() {
        let spec = CascadeSpec::new(4, 2, 0.0).unwrap();
        let err = displacement_hp(&spec, &[1e-6; 22]).unwrap_err();
        assert!(matches!(err, GcfError::DegenerateZero { .. }));
    }

    #[test]
    fn stage_derivative_matches_difference_quotient() {
        let z = Complex64::from_polar(1.0, 0.3);
        let (_, ds, _) = stage_terms(4, 2.7, z);
        let h = 1e-6;
        let fd = (stage_terms(4, 2.7, z + h).0 - stage_terms(4, 2.7, z - h).0) / (2.0 * h);
        assert!((ds - fd).norm() < 1e-6 * ds.norm());
    }

    #[test]
    fn hn_first_order_matches_oracle() {
        let spec = fig_spec();
        let predicted = displacement_hn(&spec, &[1e-6, 1e-6]).unwrap();
        let measured = oracle_displacement_hn(&spec, &[1e-6, 1e-6]).unwrap();
        let scale = predicted.iter().map(|d| d.norm()).fold(0.0, f64::max);
        for (p, m) in predicted.iter().zip(&measured) {
            if p.norm() < 1e-6 * scale {
                assert!(m.norm() < 1e-3 * scale);
                continue;
            }
            assert!((p - m).norm() / m.norm() < 0.05, "{p} vs {m}");
        }
    }
}
