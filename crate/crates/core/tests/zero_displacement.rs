use std::f64::consts::PI;

use gcf_core::polyphase::Stage;
use gcf_core::zeros::*;
use gcf_core::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn spec(d1: usize, d2: usize) -> CascadeSpec {
    let d = d1 * d2;
    let alpha = 0.79 * 2.0 * PI / (2.0 * 4.0 * d as f64);
    let p = d.trailing_zeros();
    CascadeSpec::new(p, d1.trailing_zeros() as i32 - 1, alpha).unwrap()
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|d| d.norm()).fold(0.0, f64::max)
}

/// Largest relative error of the prediction over non-stationary zeros; the
/// stationary ones must not move either.
fn worst_relative(predicted: &[Complex64], measured: &[Complex64]) -> f64 {
    let scale = max_norm(predicted);
    let mut worst: f64 = 0.0;
    for (p, m) in predicted.iter().zip(measured) {
        if p.norm() < 1e-6 * scale {
            assert!(
                m.norm() < 1e-3 * scale,
                "stationary zero moved by {}",
                m.norm()
            );
            continue;
        }
        worst = worst.max((p - m).norm() / m.norm());
    }
    worst
}

#[test]
fn count_law() {
    for d1 in [2usize, 4, 8, 16, 32, 64, 128] {
        let set = nominal_zeros_hp(&spec(d1, 4)).unwrap();
        assert_eq!(set.len(), 3 * d1 - 3);
        assert!(set.max_circle_distance() < 1e-10);
    }
}

#[test]
fn hp_prediction_matches_oracle() {
    let s = spec(8, 4);
    for delta in [1e-7, 1e-6] {
        let dh = vec![delta; s.polyphase_len()];
        let predicted = displacement_hp(&s, &dh).unwrap();
        let measured = oracle_displacement_hp(&s, &dh).unwrap();
        assert!(worst_relative(&predicted, &measured) <= 0.05);
    }
}

#[test]
fn hp_prediction_error_is_second_order() {
    let s = spec(8, 4);
    let residual = |delta: f64| {
        let dh = vec![delta; s.polyphase_len()];
        let predicted = displacement_hp(&s, &dh).unwrap();
        let measured = oracle_displacement_hp(&s, &dh).unwrap();
        predicted
            .iter()
            .zip(&measured)
            .map(|(p, m)| (p - m).norm())
            .fold(0.0, f64::max)
    };
    let slope = (residual(1e-6) / residual(1e-7)).log10();
    assert!((slope - 2.0).abs() <= 0.2, "slope {slope}");
}

#[test]
fn hn_prediction_matches_oracle_and_stays_on_circle() {
    let s = spec(8, 4);
    let predicted = displacement_hn(&s, &[1e-6, 1e-6]).unwrap();
    let measured = oracle_displacement_hn(&s, &[1e-6, 1e-6]).unwrap();
    assert!(worst_relative(&predicted, &measured) <= 0.05);
    let roots = root_oracle(&hn_polynomial(&s, &[1e-6, 1e-6]).unwrap()).unwrap();
    assert!(roots.max_circle_distance() < 1e-10);
}

#[test]
fn hn_moves_less_than_hp() {
    for d1 in [8usize, 16, 32, 64] {
        let s = spec(d1, 4);
        let hp = displacement_hp(&s, &vec![1e-4; s.polyphase_len()]).unwrap();
        let hn = displacement_hn(&s, &[1e-4, 1e-4]).unwrap();
        assert!(max_norm(&hn) < max_norm(&hp), "D1={d1}");
    }
}

fn worst_hp(d1: usize, normalized_units: bool) -> f64 {
    let s = spec(d1, 4);
    let gain = if normalized_units {
        split(&s).unwrap().h_p.gain
    } else {
        1.0
    };
    max_norm(&displacement_hp(&s, &vec![1e-4 * gain; s.polyphase_len()]).unwrap())
}

#[test]
fn hp_worst_case_trend_with_d1() {
    let d1s = [8usize, 16, 32, 64];
    // Raw coefficients: the derivative of the monic H_P grows faster than
    // the perturbation sum, so the worst zero moves less as D1 grows.
    let raw: Vec<f64> = d1s.iter().map(|&d| worst_hp(d, false)).collect();
    assert!(raw.windows(2).all(|w| w[1] < w[0]), "{raw:?}");
    // The same error on the DC-normalized taps moves zeros more as D1 grows.
    let normalized: Vec<f64> = d1s.iter().map(|&d| worst_hp(d, true)).collect();
    assert!(normalized.windows(2).all(|w| w[1] > w[0]), "{normalized:?}");
}

#[test]
fn single_coefficient_pushes_hp_zeros_off_circle() {
    let s = spec(8, 4);
    let delta = 1e-4;
    let mut dh = vec![0.0; s.polyphase_len()];
    dh[0] = delta;
    let raw = split(&s).unwrap().h_p.raw;
    let taps: Vec<f64> = raw.iter().zip(&dh).map(|(h, d)| h + d).collect();
    let roots = root_oracle(&RealPolynomial::new(taps).unwrap()).unwrap();
    assert!(roots.max_circle_distance() > delta / 10.0);
}

#[test]
fn repeated_zeros_are_flagged() {
    let s = CascadeSpec::new(5, 2, 0.0).unwrap();
    assert!(matches!(
        displacement_hp(&s, &[1e-6; 22]),
        Err(GcfError::DegenerateZero { .. })
    ));
}

#[test]
fn root_oracle_examples() {
    let r = root_oracle(&RealPolynomial::new(vec![1.0, 1.0]).unwrap()).unwrap();
    assert!((r.zeros[0] + 1.0).norm() < 1e-14);
    let r = root_oracle(&comb_tf(1, 4).unwrap()).unwrap();
    assert_eq!(r.len(), 3);
    for want in [Complex64::i(), -Complex64::i(), Complex64::new(-1.0, 0.0)] {
        assert!(r.zeros.iter().any(|z| (z - want).norm() < 1e-12));
    }
}

proptest! {
    #[test]
    fn perturbed_stage_roots_stay_on_circle(r in -0.99f64..2.99, log_m in 0u32..3) {
        let stage = Stage { index: log_m, multiplier: r, delay: 1 << log_m };
        let roots = root_oracle(&stage.polynomial()).unwrap();
        prop_assert_eq!(roots.len(), 3 << log_m);
        prop_assert!(roots.max_circle_distance() < 1e-10);
    }

    #[test]
    fn hp_count_law_any_alpha(p in 1u32..8, q in 0.05f64..1.0) {
        let s = CascadeSpec::new(p + 1, p as i32 - 1, q * PI / (8.0 * (1u64 << p) as f64)).unwrap();
        prop_assert_eq!(nominal_zeros_hp(&s).unwrap().len(), 3 * (1usize << p) - 3);
    }
}
