//! Streaming partial polyphase decimation.
//!
//! The input is commutated into D1 polyphase branches (sample x[m·D1 - k]
//! feeds branch k), the branches are combined at rate f_s/D1, and the result
//! runs through the H_N stages, each a [1, r, r, 1] FIR followed by a
//! keep-even-samples decimator. Output phase 0 is aligned with the first
//! input sample.

use crate::error::{invalid, Result};
use crate::poly::RealPolynomial;

use super::{polyphase_components, split, CascadeSpec, PolyphaseBank};

/// Full-rate FIR filtering followed by keeping samples 0, D, 2D, ... of the
/// complete convolution (including its tail).
pub fn reference_decimate(input: &[f64], tf: &RealPolynomial, decimation: usize) -> Vec<f64> {
    let step = decimation.max(1);
    if input.is_empty() {
        return Vec::new();
    }
    let h = tf.coeffs();
    let full_len = input.len() + h.len() - 1;
    (0..full_len)
        .step_by(step)
        .map(|n| {
            let lo = n.saturating_sub(input.len() - 1);
            let hi = n.min(h.len() - 1);
            (lo..=hi).map(|j| h[j] * input[n - j]).sum()
        })
        .collect()
}

/// Polyphase front end decimating by D1.
#[derive(Debug, Clone)]
pub struct PolyphaseSection {
    bank: PolyphaseBank,
    /// branches[k][m % inner] holds x[m·D1 - k].
    branches: Vec<Vec<f64>>,
    time: usize,
}

impl PolyphaseSection {
    pub fn new(bank: PolyphaseBank) -> Self {
        let inner = bank.inner_len();
        let branches = vec![vec![0.0; inner]; bank.d1];
        Self {
            bank,
            branches,
            time: 0,
        }
    }

    pub fn bank(&self) -> &PolyphaseBank {
        &self.bank
    }

    /// Feeds one full-rate sample; returns an output on every D1-th input.
    pub fn push(&mut self, x: f64) -> Option<f64> {
        let d1 = self.bank.d1;
        let inner = self.bank.inner_len();
        let k = (d1 - self.time % d1) % d1;
        let m = (self.time + k) / d1;
        self.branches[k][m % inner] = x;
        self.time += 1;
        if k != 0 {
            return None;
        }
        let mut acc = 0.0;
        for (comp, branch) in self.bank.components.iter().zip(&self.branches) {
            for (n, &e) in comp.iter().enumerate().take(m + 1) {
                acc += e * branch[(m - n) % inner];
            }
        }
        Some(acc)
    }
}

/// One [1, r, r, 1] FIR stage followed by decimation by two.
#[derive(Debug, Clone)]
pub struct DecimatingStage {
    multiplier: f64,
    /// Previous three inputs, most recent first.
    state: [f64; 3],
    even: bool,
}

impl DecimatingStage {
    pub fn new(multiplier: f64) -> Self {
        Self {
            multiplier,
            state: [0.0; 3],
            even: true,
        }
    }

    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    pub fn push(&mut self, x: f64) -> Option<f64> {
        let [s1, s2, s3] = self.state;
        let out = self.even.then_some(x + self.multiplier * (s1 + s2) + s3);
        self.state = [x, s1, s2];
        self.even = !self.even;
        out
    }
}

/// Streaming H_P · H_N decimator by D = D1·D2.
///
/// Blocks of any length may be fed through [`process`](Self::process); the
/// carried state makes the output independent of block boundaries.
/// [`finish`](Self::finish) flushes the convolution tail.
#[derive(Debug, Clone)]
pub struct PartialPolyphaseDecimator {
    polyphase: PolyphaseSection,
    stages: Vec<DecimatingStage>,
    /// 1 / Π(2 + 2r_u), applied once at the output.
    scale: f64,
    decimation: usize,
    filter_len: usize,
    consumed: usize,
    produced: usize,
}

impl PartialPolyphaseDecimator {
    pub fn new(spec: &CascadeSpec) -> Result<Self> {
        let s = split(spec)?;
        let multipliers: Vec<f64> = s.h_n.iter().map(|st| st.multiplier).collect();
        Self::from_parts(&s.h_p.taps, spec.d1(), &multipliers)
    }

    /// Builds the decimator from DC-normalized polyphase taps and H_N stage
    /// multipliers (in cascade order).
    pub fn from_parts(h_p: &[f64], d1: usize, multipliers: &[f64]) -> Result<Self> {
        if !d1.is_power_of_two() {
            return invalid(format!("D1 must be a power of two, got {d1}"));
        }
        if multipliers
            .iter()
            .any(|r| !r.is_finite() || 2.0 + 2.0 * r == 0.0)
        {
            return invalid("stage multipliers must be finite with r != -1");
        }
        let bank = polyphase_components(h_p, d1)?;
        let scale = 1.0 / multipliers.iter().map(|r| 2.0 + 2.0 * r).product::<f64>();
        // H_N at full rate spans 3·Σ 2^u = 3·D1·(D2 - 1) samples.
        let d2 = 1usize << multipliers.len();
        let filter_len = h_p.len() + 3 * d1 * (d2 - 1);
        Ok(Self {
            polyphase: PolyphaseSection::new(bank),
            stages: multipliers
                .iter()
                .map(|&r| DecimatingStage::new(r))
                .collect(),
            scale,
            decimation: d1 * d2,
            filter_len,
            consumed: 0,
            produced: 0,
        })
    }

    pub fn decimation(&self) -> usize {
        self.decimation
    }

    /// Length of the equivalent full-rate impulse response.
    pub fn filter_len(&self) -> usize {
        self.filter_len
    }

    fn push(&mut self, x: f64) -> Option<f64> {
        let mut v = self.polyphase.push(x)?;
        for stage in &mut self.stages {
            v = stage.push(v)?;
        }
        self.produced += 1;
        Some(v * self.scale)
    }

    pub fn process(&mut self, input: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(input.len() / self.decimation + 1);
        self.process_into(input, &mut out);
        out
    }

    pub fn process_into(&mut self, input: &[f64], out: &mut Vec<f64>) {
        self.consumed += input.len();
        out.extend(input.iter().filter_map(|&x| self.push(x)));
    }

    /// Feeds zeros until every output of the full convolution has been
    /// emitted and returns those remaining outputs.
    pub fn finish(&mut self) -> Vec<f64> {
        let target = if self.consumed == 0 {
            0
        } else {
            (self.consumed + self.filter_len - 1).div_ceil(self.decimation)
        };
        let mut out = Vec::new();
        while self.produced < target {
            if let Some(y) = self.push(0.0) {
                out.push(y);
            }
        }
        out
    }
}

/// Decimates a finite sequence through the partial polyphase structure.
pub fn decimate_stream(input: &[f64], spec: &CascadeSpec) -> Result<Vec<f64>> {
    let mut dec = PartialPolyphaseDecimator::new(spec)?;
    let mut out = dec.process(input);
    out.extend(dec.finish());
    Ok(out)
}
