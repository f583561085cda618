//! Quantization-noise power of a ΣΔ modulator folding into the baseband
//! after decimation, and its reduction relative to a third-order comb.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::filter::{comb_tf, gcf3_impulse_raw};
use crate::poly::RealPolynomial;
use crate::quadrature::integrate;

/// Relative tolerance of every folding-band integral.
pub const PQN_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QnModel {
    /// Modulator order B.
    pub b: u32,
    /// Noise PSD scale S_e.
    pub se: f64,
    /// Signal band edge f_c.
    pub fc: f64,
    /// Decimation factor of the section under test.
    pub d1: usize,
}

impl QnModel {
    pub fn new(b: u32, se: f64, fc: f64, d1: usize) -> Result<Self> {
        if b < 1 {
            return invalid("modulator order B must be >= 1");
        }
        if !se.is_finite() || se <= 0.0 {
            return invalid(format!("S_e must be positive, got {se}"));
        }
        if d1 < 2 {
            return invalid(format!("D1 must be >= 2, got {d1}"));
        }
        if fc.is_nan() || fc <= 0.0 || fc >= 0.5 / d1 as f64 {
            return invalid(format!("f_c must lie in (0, 1/(2·D1)), got {fc}"));
        }
        Ok(Self { b, se, fc, d1 })
    }

    /// B = 2, S_e = 1 and f_c = 1/(2·ν·D1).
    pub fn reference(d1: usize, nu: usize) -> Result<Self> {
        Self::new(2, 1.0, 0.5 / (nu * d1) as f64, d1)
    }

    /// Folding bands [k/D1 - f_c, k/D1 + f_c], k = 1..⌊D1/2⌋.
    pub fn bands(&self) -> Vec<(f64, f64)> {
        (1..=self.d1 / 2)
            .map(|k| {
                let center = k as f64 / self.d1 as f64;
                (center - self.fc, center + self.fc)
            })
            .collect()
    }
}

/// S_B(f) = S_e·(2 sin πf)^{2B}.
pub fn qn_psd(f: f64, model: &QnModel) -> f64 {
    model.se * (2.0 * (PI * f).sin()).powi(2 * model.b as i32)
}

/// Σ_k ∫_band |H(e^{j2πf})|² S_B(f) df.
pub fn pqn(tf: &RealPolynomial, model: &QnModel) -> f64 {
    pqn_with(tf, model, PQN_TOLERANCE, Execution::default())
}

pub fn pqn_with(tf: &RealPolynomial, model: &QnModel, rel_tol: f64, exec: Execution) -> f64 {
    exec.map(&model.bands(), |&(lo, hi)| {
        integrate(
            |f| tf.eval_freq(2.0 * PI * f).norm_sqr() * qn_psd(f, model),
            lo,
            hi,
            rel_tol,
        )
        .value
    })
    .iter()
    .sum()
}

/// 10·log10(P_qn(tf) / P_qn(comb³)) in dB.
pub fn delta_pqn(tf: &RealPolynomial, model: &QnModel) -> Result<f64> {
    delta_pqn_with(tf, model, Execution::default())
}

pub fn delta_pqn_with(tf: &RealPolynomial, model: &QnModel, exec: Execution) -> Result<f64> {
    let comb = comb_tf(3, model.d1)?;
    let base = pqn_with(&comb, model, PQN_TOLERANCE, exec);
    Ok(10.0 * (pqn_with(tf, model, PQN_TOLERANCE, exec) / base).log10())
}

/// Parameters shared by every cell of a ΔP_qn sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepTemplate {
    /// Rotation parameter |q| of the third-order section.
    pub q: f64,
    pub nu: usize,
    pub b: u32,
    pub se: f64,
}

impl Default for SweepTemplate {
    fn default() -> Self {
        Self {
            q: 0.79,
            nu: 4,
            b: 2,
            se: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub d1s: Vec<usize>,
    pub dhs: Vec<f64>,
    /// ΔP_qn in dB, indexed `[d1][dh]`.
    pub values: Vec<Vec<f64>>,
}

/// ΔP_qn of the third-order section H_P for every (D1, Δh), with Δh added
/// to each raw coefficient h_P(n).
pub fn deltapqn_sweep(d1s: &[usize], dhs: &[f64], template: &SweepTemplate) -> Result<SweepTable> {
    deltapqn_sweep_with(d1s, dhs, template, Execution::default())
}

pub fn deltapqn_sweep_with(
    d1s: &[usize],
    dhs: &[f64],
    template: &SweepTemplate,
    exec: Execution,
) -> Result<SweepTable> {
    if template.nu < 2 {
        return invalid(format!("ν must be >= 2, got {}", template.nu));
    }
    if !(0.0..=1.0).contains(&template.q) {
        return invalid(format!("|q| must lie in [0, 1], got {}", template.q));
    }
    if let Some(d) = d1s.iter().find(|d| !d.is_power_of_two() || **d < 2) {
        return invalid(format!("D1 must be a power of two >= 2, got {d}"));
    }
    if let Some(dh) = dhs.iter().find(|d| !d.is_finite()) {
        return invalid(format!("Δh must be finite, got {dh}"));
    }

    struct Row {
        model: QnModel,
        raw: Vec<f64>,
        base: f64,
    }
    let rows = d1s
        .iter()
        .map(|&d1| {
            let fc = 0.5 / (template.nu * d1) as f64;
            let model = QnModel::new(template.b, template.se, fc, d1)?;
            let raw = gcf3_impulse_raw(d1, template.q * 2.0 * PI * fc)?;
            let base = pqn_with(&comb_tf(3, d1)?, &model, PQN_TOLERANCE, exec);
            Ok(Row { model, raw, base })
        })
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<(usize, usize)> = (0..d1s.len())
        .flat_map(|i| (0..dhs.len()).map(move |j| (i, j)))
        .collect();
    let results = exec.map(&cells, |&(i, j)| {
        let row = &rows[i];
        let taps: Vec<f64> = row.raw.iter().map(|h| h + dhs[j]).collect();
        let tf = RealPolynomial::normalized(taps)?;
        // Cells already run in parallel; each integral stays sequential.
        let p = pqn_with(&tf, &row.model, PQN_TOLERANCE, Execution::Sequential);
        Ok(10.0 * (p / row.base).log10())
    });
    let flat = results.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(SweepTable {
        d1s: d1s.to_vec(),
        dhs: dhs.to_vec(),
        values: flat
            .chunks(dhs.len().max(1))
            .map(<[f64]>::to_vec)
            .take(d1s.len())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::{gcf_tf, GcfSpec};

    #[test]
    fn psd_examples() {
        let m = |b| QnModel::new(b, 1.0, 0.01, 4).unwrap();
        assert_eq!(qn_psd(0.0, &m(3)), 0.0);
        assert!((qn_psd(0.5, &m(2)) - 16.0).abs() < 1e-12);
        assert!((qn_psd(0.25, &m(1)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn model_validation() {
        assert!(QnModel::new(0, 1.0, 0.01, 8).is_err());
        assert!(QnModel::new(2, 0.0, 0.01, 8).is_err());
        assert!(QnModel::new(2, 1.0, 1.0 / 16.0, 8).is_err());
        assert!(QnModel::new(2, 1.0, 0.01, 1).is_err());
        let m = QnModel::reference(32, 4).unwrap();
        assert_eq!(m.fc, 1.0 / 256.0);
        assert_eq!(m.bands().len(), 16);
    }

    #[test]
    fn all_pass_narrow_bands_vanish() {
        let one = RealPolynomial::one();
        let wide = pqn(&one, &QnModel::new(1, 1.0, 1e-2, 2).unwrap());
        let narrow = pqn(&one, &QnModel::new(1, 1.0, 1e-6, 2).unwrap());
        // S_1 = 4 at f = 0.5, so the band integral is ≈ 4·2·f_c.
        assert!((narrow - 8e-6).abs() < 1e-12);
        assert!(narrow < wide);
    }

    #[test]
    fn comb_is_its_own_reference() {
        let m = QnModel::reference(16, 4).unwrap();
        assert_eq!(delta_pqn(&comb_tf(3, 16).unwrap(), &m).unwrap(), 0.0);
    }

    #[test]
    fn gcf_gain_near_eight_db() {
        let spec = GcfSpec::optimal(3, 32, 4).unwrap();
        let m = QnModel::reference(32, 4).unwrap();
        let g = delta_pqn(&gcf_tf(&spec).unwrap(), &m).unwrap();
        assert!((-9.0..=-7.0).contains(&g), "{g}");
    }

    #[test]
    fn sweep_shape_and_zero_column() {
        let t = deltapqn_sweep(&[16, 32], &[0.0, 1e-3], &SweepTemplate::default()).unwrap();
        assert_eq!(t.values.len(), 2);
        assert!(t.values.iter().all(|row| row.len() == 2));
        for row in &t.values {
            assert!((-9.5..=-6.5).contains(&row[0]));
        }
        assert!(deltapqn_sweep(&[12], &[0.0], &SweepTemplate::default()).is_err());
    }
}
