//! Power-of-two factorization of the third-order GCF and its split into a
//! polyphase section H_P (decimating by D1) followed by a cascade H_N of
//! non-recursive by-2 stages.

mod stream;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use stream::{
    decimate_stream, reference_decimate, DecimatingStage, PartialPolyphaseDecimator,
    PolyphaseSection,
};

use crate::error::{invalid, GcfError, Result};
use crate::filter::{gcf3_impulse, GcfSpec, ImpulseResponse};
use crate::poly::{convolve, upsample_taps, RealPolynomial};

/// Tolerance used when checking the ± symmetry of a rotation set.
const SYMMETRY_TOL: f64 = 1e-12;

/// Stage multiplier r_i = 1 + 2cos(2^i α).
pub fn stage_multiplier(index: u32, alpha: f64) -> f64 {
    1.0 + 2.0 * ((1u64 << index) as f64 * alpha).cos()
}

/// Partial polyphase layout of a third-order GCF with D = 2^p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeSpec {
    pub p: u32,
    /// Polyphase index in [-1, p-1]; D1 = 2^(pp+1).
    pub pp: i32,
    /// Rotation angle α in radians.
    pub alpha: f64,
}

impl CascadeSpec {
    pub fn new(p: u32, pp: i32, alpha: f64) -> Result<Self> {
        if p == 0 || p > 30 {
            return invalid(format!("p must be in 1..=30, got {p}"));
        }
        if pp < -1 || pp > p as i32 - 1 {
            return invalid(format!(
                "polyphase index pp must be in [-1, {}], got {pp}",
                p - 1
            ));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return invalid(format!(
                "rotation angle must be finite and >= 0, got {alpha}"
            ));
        }
        Ok(Self { p, pp, alpha })
    }

    /// Cascade layout for a third-order GCF spec whose D is a power of two.
    pub fn from_gcf(spec: &GcfSpec, pp: i32) -> Result<Self> {
        let (p, alpha) = product_form_params(spec)?;
        Self::new(p, pp, alpha)
    }

    pub fn decimation(&self) -> usize {
        1 << self.p
    }

    pub fn d1(&self) -> usize {
        1 << (self.pp + 1)
    }

    pub fn d2(&self) -> usize {
        1 << (self.p as i32 - self.pp - 1)
    }

    /// Stage indices u = pp+1 .. p-1 belonging to H_N.
    pub fn cascade_indices(&self) -> std::ops::Range<u32> {
        (self.pp + 1) as u32..self.p
    }

    /// Multipliers r_u of the H_N stages, in cascade order.
    pub fn stage_multipliers(&self) -> Vec<f64> {
        self.cascade_indices()
            .map(|u| stage_multiplier(u, self.alpha))
            .collect()
    }

    /// Number of raw polyphase coefficients, 3·D1 - 2.
    pub fn polyphase_len(&self) -> usize {
        3 * self.d1() - 2
    }
}

/// Validates a GCF spec for the product form and returns (p, α).
fn product_form_params(spec: &GcfSpec) -> Result<(u32, f64)> {
    let spec = GcfSpec::new(spec.order, spec.decimation, spec.rotations.clone(), spec.nu)?;
    if spec.order != 3 {
        return invalid(format!(
            "the power-of-two factorization covers third-order GCFs only, got order {}",
            spec.order
        ));
    }
    let d = spec.decimation;
    if !d.is_power_of_two() {
        return Err(GcfError::NotPowerOfTwo(d));
    }
    let q = &spec.rotations;
    let a = q[0].abs();
    let mut h1 = [q[0], q[1], q[2]];
    h1.sort_by(|x, y| x.total_cmp(y));
    let symmetric = (h1[0] + a).abs() <= SYMMETRY_TOL
        && h1[1].abs() <= SYMMETRY_TOL
        && (h1[2] - a).abs() <= SYMMETRY_TOL
        && (q[3].abs() - a).abs() <= SYMMETRY_TOL;
    if !symmetric {
        return Err(GcfError::AsymmetricRotations(q.clone()));
    }
    Ok((d.trailing_zeros(), a * 2.0 * PI * spec.fc()))
}

/// One factor [1, r, r, 1] of the product form, acting on z^-delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    /// Position i in the full product (its full-rate delay is 2^i).
    pub index: u32,
    pub multiplier: f64,
    pub delay: usize,
}

impl Stage {
    pub fn base_taps(&self) -> [f64; 4] {
        [1.0, self.multiplier, self.multiplier, 1.0]
    }

    /// Taps of the stage with its delay expanded.
    pub fn taps(&self) -> Vec<f64> {
        upsample_taps(&self.base_taps(), self.delay)
    }

    pub fn polynomial(&self) -> RealPolynomial {
        RealPolynomial::new(self.taps()).expect("stage leading tap is 1")
    }

    /// Un-normalized DC gain, 2 + 2r.
    pub fn dc_gain(&self) -> f64 {
        2.0 + 2.0 * self.multiplier
    }
}

/// Splits a third-order GCF with D = 2^p into p stages [1, r_i, r_i, 1] in
/// z^-(2^i), i = 0..p-1.
pub fn factorize(spec: &GcfSpec) -> Result<Vec<Stage>> {
    let (p, alpha) = product_form_params(spec)?;
    Ok((0..p)
        .map(|i| Stage {
            index: i,
            multiplier: stage_multiplier(i, alpha),
            delay: 1 << i,
        })
        .collect())
}

/// Raw product of delay-expanded stages.
pub fn expand_stages(stages: &[Stage]) -> Vec<f64> {
    stages
        .iter()
        .fold(vec![1.0], |acc, s| convolve(&acc, &s.taps()))
}

/// Polyphase section and non-recursive cascade of a [`CascadeSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub h_p: ImpulseResponse,
    /// H_N stages with delays re-indexed to the post-decimation rate
    /// (stage u acts on z^-(2^(u-pp-1)) at f_s/D1).
    pub h_n: Vec<Stage>,
}

impl Split {
    /// The same H_N stages with their full-rate delays 2^u.
    pub fn full_rate_stages(&self, spec: &CascadeSpec) -> Vec<Stage> {
        self.h_n
            .iter()
            .map(|s| Stage {
                delay: s.delay * spec.d1(),
                ..*s
            })
            .collect()
    }
}

/// H_GCF3 = H_P · H_N with H_P the stages 0..=pp and H_N the rest.
pub fn split(spec: &CascadeSpec) -> Result<Split> {
    let spec = CascadeSpec::new(spec.p, spec.pp, spec.alpha)?;
    let d1 = spec.d1();
    let h_p = if d1 == 1 {
        ImpulseResponse::from_raw(vec![1.0])?
    } else {
        gcf3_impulse(d1, spec.alpha)?
    };
    let h_n = spec
        .cascade_indices()
        .map(|u| Stage {
            index: u,
            multiplier: stage_multiplier(u, spec.alpha),
            delay: 1 << (u as i32 - spec.pp - 1),
        })
        .collect();
    Ok(Split { h_p, h_n })
}

/// Polyphase components e_k(n) = h(D1·n + k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyphaseBank {
    pub d1: usize,
    pub components: Vec<Vec<f64>>,
    /// Length of the decomposed response (components are zero padded).
    pub taps_len: usize,
}

impl PolyphaseBank {
    pub fn inner_len(&self) -> usize {
        self.components.first().map_or(0, Vec::len)
    }

    /// Rebuilds h(n) from Σ_k z^-k E_k(z^D1).
    pub fn interleave(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.d1 * self.inner_len()];
        for (k, comp) in self.components.iter().enumerate() {
            for (n, &c) in comp.iter().enumerate() {
                out[self.d1 * n + k] = c;
            }
        }
        out.truncate(self.taps_len);
        out
    }

    /// Coefficient c_{n,k} = h(D1·n + k).
    pub fn coefficient(&self, n: usize, k: usize) -> f64 {
        self.components[k][n]
    }
}

/// Decomposes `h_p` into `d1` polyphase components of uniform length
/// ⌈len/d1⌉.
pub fn polyphase_components(h_p: &[f64], d1: usize) -> Result<PolyphaseBank> {
    if d1 < 1 {
        return invalid("polyphase factor D1 must be >= 1");
    }
    if h_p.is_empty() {
        return invalid("cannot decompose an empty response");
    }
    if h_p.len() > 3 * d1 - 2 && d1 > 1 {
        return invalid(format!(
            "response of length {} exceeds 3·D1-2 = {}",
            h_p.len(),
            3 * d1 - 2
        ));
    }
    let inner = h_p.len().div_ceil(d1);
    let components = (0..d1)
        .map(|k| {
            (0..inner)
                .map(|n| h_p.get(d1 * n + k).copied().unwrap_or(0.0))
                .collect()
        })
        .collect();
    Ok(PolyphaseBank {
        d1,
        components,
        taps_len: h_p.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::gcf3_tf_oracle;

    fn alpha(q: f64, nu: usize, d: usize) -> f64 {
        q * PI / (nu * d) as f64
    }

    #[test]
    fn factorize_comb_case() {
        let spec = GcfSpec::new(3, 8, vec![0.0; 4], 4).unwrap();
        let stages = factorize(&spec).unwrap();
        assert_eq!(stages.len(), 3);
        for (i, s) in stages.iter().enumerate() {
            assert_eq!(s.base_taps(), [1.0, 3.0, 3.0, 1.0]);
            assert_eq!(s.delay, 1 << i);
        }
    }

    #[test]
    fn factorize_table_rotations() {
        let spec = GcfSpec::optimal(3, 32, 4).unwrap();
        let stages = factorize(&spec).unwrap();
        let a = 0.79 * 2.0 * PI / 256.0;
        for (i, s) in stages.iter().enumerate() {
            let expected = 1.0 + 2.0 * ((1 << i) as f64 * a).cos();
            assert!((s.multiplier - expected).abs() < 1e-15);
            assert!(s.multiplier > -1.0 && s.multiplier < 3.0);
        }
        let product = RealPolynomial::normalized(expand_stages(&stages)).unwrap();
        let oracle = gcf3_tf_oracle(32, a).unwrap();
        for (x, y) in product.coeffs().iter().zip(oracle.coeffs()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn factorize_base_case() {
        let spec = GcfSpec::optimal(3, 2, 4).unwrap();
        let stages = factorize(&spec).unwrap();
        let a = 0.79 * 2.0 * PI / 16.0;
        assert_eq!(stages.len(), 1);
        let r = 1.0 + 2.0 * a.cos();
        assert_eq!(stages[0].base_taps(), [1.0, r, r, 1.0]);
    }

    #[test]
    fn factorize_rejections() {
        let spec = GcfSpec::optimal(3, 12, 4).unwrap();
        assert_eq!(factorize(&spec), Err(GcfError::NotPowerOfTwo(12)));
        let spec = GcfSpec::new(3, 8, vec![-0.5, 0.0, 0.79, 0.79], 4).unwrap();
        assert!(matches!(
            factorize(&spec),
            Err(GcfError::AsymmetricRotations(_))
        ));
        let spec = GcfSpec::new(3, 8, vec![0.79, 0.0, -0.79, -0.79], 4).unwrap();
        assert!(factorize(&spec).is_ok());
        let spec = GcfSpec::optimal(4, 8, 4).unwrap();
        assert!(factorize(&spec).is_err());
    }

    #[test]
    fn cascade_spec_geometry() {
        let c = CascadeSpec::new(5, 2, 0.01).unwrap();
        assert_eq!((c.decimation(), c.d1(), c.d2()), (32, 8, 4));
        assert_eq!(c.cascade_indices(), 3..5);
        let full = CascadeSpec::new(5, 4, 0.01).unwrap();
        assert_eq!((full.d1(), full.d2()), (32, 1));
        assert!(full.stage_multipliers().is_empty());
        let pure = CascadeSpec::new(5, -1, 0.01).unwrap();
        assert_eq!((pure.d1(), pure.d2()), (1, 32));
        assert!(CascadeSpec::new(5, 5, 0.0).is_err());
        assert!(CascadeSpec::new(5, -2, 0.0).is_err());
        assert!(CascadeSpec::new(0, -1, 0.0).is_err());
        assert!(CascadeSpec::new(3, 0, -1.0).is_err());
        let gcf = GcfSpec::optimal(3, 32, 4).unwrap();
        let c = CascadeSpec::from_gcf(&gcf, 2).unwrap();
        assert!((c.alpha - 0.79 * PI / 128.0).abs() < 1e-15);
    }

    #[test]
    fn split_full_polyphase() {
        let a = alpha(0.79, 4, 32);
        let s = split(&CascadeSpec::new(5, 4, a).unwrap()).unwrap();
        assert!(s.h_n.is_empty());
        assert_eq!(s.h_p, gcf3_impulse(32, a).unwrap());
    }

    #[test]
    fn split_pure_cascade() {
        let a = alpha(0.79, 4, 32);
        let spec = CascadeSpec::new(5, -1, a).unwrap();
        let s = split(&spec).unwrap();
        assert_eq!(s.h_p.taps, vec![1.0]);
        assert_eq!(s.h_n.len(), 5);
        for (u, st) in s.h_n.iter().enumerate() {
            assert_eq!(st.delay, 1 << u);
        }
        assert_eq!(s.full_rate_stages(&spec), s.h_n);
    }

    #[test]
    fn split_partial() {
        let a = alpha(0.79, 4, 32);
        let spec = CascadeSpec::new(5, 2, a).unwrap();
        let s = split(&spec).unwrap();
        assert_eq!(s.h_p.len(), 22);
        assert_eq!(s.h_n.len(), 2);
        assert_eq!((s.h_n[0].index, s.h_n[0].delay), (3, 1));
        assert_eq!((s.h_n[1].index, s.h_n[1].delay), (4, 2));
        assert!((s.h_n[0].multiplier - stage_multiplier(3, a)).abs() < 1e-15);

        // H_P from the recursion equals the expansion of stages 0..=pp.
        let gcf = GcfSpec::optimal(3, 32, 4).unwrap();
        let stages = factorize(&gcf).unwrap();
        let hp = RealPolynomial::normalized(expand_stages(&stages[..3])).unwrap();
        for (x, y) in s.h_p.taps.iter().zip(hp.coeffs()) {
            assert!((x - y).abs() < 1e-12);
        }
        // H_P · H_N (full rate) equals the whole filter.
        let full = crate::poly::convolve(&s.h_p.raw, &expand_stages(&s.full_rate_stages(&spec)));
        let full = RealPolynomial::normalized(full).unwrap();
        let oracle = gcf3_tf_oracle(32, a).unwrap();
        for (x, y) in full.coeffs().iter().zip(oracle.coeffs()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn polyphase_examples() {
        let bank = polyphase_components(&[0.125, 0.375, 0.375, 0.125], 2).unwrap();
        assert_eq!(
            bank.components,
            vec![vec![0.125, 0.375], vec![0.375, 0.125]]
        );

        let bank = polyphase_components(&[1.0], 4).unwrap();
        assert_eq!(
            bank.components,
            vec![vec![1.0], vec![0.0], vec![0.0], vec![0.0]]
        );
        assert_eq!(bank.interleave(), vec![1.0]);

        let h = gcf3_impulse(8, alpha(0.79, 4, 8)).unwrap();
        let bank = polyphase_components(&h.taps, 8).unwrap();
        assert_eq!(bank.components.len(), 8);
        assert_eq!(bank.inner_len(), 3);
        assert_eq!(bank.interleave(), h.taps);
        assert_eq!(bank.coefficient(1, 3), h.taps[11]);

        assert!(polyphase_components(&[1.0; 5], 2).is_err());
        assert!(polyphase_components(&[1.0], 0).is_err());
    }
}
