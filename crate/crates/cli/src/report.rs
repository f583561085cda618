//! The JSON filter report written by `design` and read back by
//! `simulate --filter-file`.

use gcf_core::polyphase::{split, stage_multiplier};
use gcf_core::zeros::{nominal_zeros_gcf, nominal_zeros_hn, nominal_zeros_hp};
use gcf_core::{gcf_tf, polyphase_components, CascadeSpec, GcfSpec, PartialPolyphaseDecimator};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::output::SCHEMA_VERSION;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecEcho {
    pub order: usize,
    pub d: usize,
    pub nu: usize,
    pub q: Vec<f64>,
    pub fc: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub index: u32,
    pub r: f64,
    /// `"h_p"` for stages absorbed in the polyphase section, `"h_n"` for the
    /// decimating cascade.
    pub section: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyphaseReport {
    pub p: u32,
    pub pp: i32,
    pub d1: usize,
    pub d2: usize,
    pub alpha: f64,
    /// DC-normalized h_P.
    pub h_p: Vec<f64>,
    /// h_P as produced by the recursion, h_P(0) = 1.
    pub h_p_raw: Vec<f64>,
    /// Polyphase components e_k(n) = h_P(n·D1 + k).
    pub bank: Vec<Vec<f64>>,
    pub stages: Vec<StageReport>,
    /// Nominal zeros as [re, im] pairs.
    pub zeros_h_p: Vec<[f64; 2]>,
    pub zeros_h_n: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub schema: u32,
    pub spec: SpecEcho,
    pub h_gcf: Vec<f64>,
    /// Designed zeros of H_GCF as [re, im] pairs.
    pub zeros: Vec<[f64; 2]>,
    /// Present for third-order filters, which need a power-of-two D.
    pub polyphase: Option<PolyphaseReport>,
}

fn pairs(zeros: &[Complex64]) -> Vec<[f64; 2]> {
    zeros.iter().map(|z| [z.re, z.im]).collect()
}

fn polyphase_report(cascade: &CascadeSpec) -> Result<PolyphaseReport, CliError> {
    let parts = split(cascade)?;
    let d1 = cascade.d1();
    let bank = polyphase_components(&parts.h_p.taps, d1)?;
    let hn: Vec<u32> = cascade.cascade_indices().collect();
    let stages = (0..cascade.p)
        .map(|u| match parts.h_n.iter().find(|s| s.index == u) {
            Some(s) => StageReport {
                index: u,
                r: s.multiplier,
                section: "h_n".into(),
            },
            None => StageReport {
                index: u,
                r: stage_multiplier(u, cascade.alpha),
                section: "h_p".into(),
            },
        })
        .collect();
    let zeros_h_p = if d1 >= 2 {
        pairs(&nominal_zeros_hp(cascade)?.zeros)
    } else {
        Vec::new()
    };
    let zeros_h_n = if hn.is_empty() {
        Vec::new()
    } else {
        pairs(&nominal_zeros_hn(cascade)?.zeros)
    };
    Ok(PolyphaseReport {
        p: cascade.p,
        pp: cascade.pp,
        d1,
        d2: cascade.d2(),
        alpha: cascade.alpha,
        h_p: parts.h_p.taps,
        h_p_raw: parts.h_p.raw,
        bank: bank.components,
        stages,
        zeros_h_p,
        zeros_h_n,
    })
}

impl DesignReport {
    pub fn build(spec: &GcfSpec, cascade: Option<&CascadeSpec>) -> Result<Self, CliError> {
        Ok(Self {
            schema: SCHEMA_VERSION,
            spec: SpecEcho {
                order: spec.order,
                d: spec.decimation,
                nu: spec.nu,
                q: spec.rotations.clone(),
                fc: spec.fc(),
                rho: spec.rho(),
            },
            h_gcf: gcf_tf(spec)?.into_coeffs(),
            zeros: pairs(&nominal_zeros_gcf(spec)?.zeros),
            polyphase: cascade.map(polyphase_report).transpose()?,
        })
    }

    /// Rebuilds the streaming decimator from the stored coefficients alone.
    pub fn decimator(&self) -> Result<PartialPolyphaseDecimator, CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "filter report schema {} is not supported (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        let poly = self
            .polyphase
            .as_ref()
            .ok_or_else(|| CliError::Validation("filter report has no polyphase section".into()))?;
        let multipliers: Vec<f64> = poly
            .stages
            .iter()
            .filter(|s| s.section == "h_n")
            .map(|s| s.r)
            .collect();
        Ok(PartialPolyphaseDecimator::from_parts(
            &poly.h_p,
            poly.d1,
            &multipliers,
        )?)
    }
}
