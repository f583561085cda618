use std::f64::consts::PI;

use gcf_core::filter::gcf3_impulse_raw;
use gcf_core::qn::{pqn_with, PQN_TOLERANCE};
use gcf_core::*;
use proptest::prelude::*;

#[test]
fn comb_reference_is_exactly_zero_db() {
    for d1 in [4usize, 16, 64] {
        let m = QnModel::reference(d1, 4).unwrap();
        assert_eq!(delta_pqn(&comb_tf(3, d1).unwrap(), &m).unwrap(), 0.0);
    }
}

#[test]
fn unperturbed_gain_within_table_range() {
    for d1 in [16usize, 32, 64, 128] {
        let spec = GcfSpec::optimal(3, d1, 4).unwrap();
        let m = QnModel::reference(d1, 4).unwrap();
        let g = delta_pqn(&gcf_tf(&spec).unwrap(), &m).unwrap();
        assert!((-9.5..=-6.5).contains(&g), "D1={d1}: {g}");
    }
}

#[test]
fn quadrature_has_converged() {
    let spec = GcfSpec::optimal(3, 32, 4).unwrap();
    let tf = gcf_tf(&spec).unwrap();
    let m = QnModel::reference(32, 4).unwrap();
    let a = pqn_with(&tf, &m, PQN_TOLERANCE, Execution::default());
    let b = pqn_with(&tf, &m, PQN_TOLERANCE / 2.0, Execution::default());
    assert!((a - b).abs() / a < 1e-6);
}

#[test]
fn small_errors_keep_the_gain() {
    let t = deltapqn_sweep(
        &[32, 64, 128, 256, 512],
        &[0.0, 1e-3],
        &SweepTemplate::default(),
    )
    .unwrap();
    for (d1, row) in t.d1s.iter().zip(&t.values) {
        assert!((row[1] - row[0]).abs() <= 1.0, "D1={d1}: {row:?}");
        assert!(row[1] < 0.0);
    }
}

#[test]
fn large_errors_erode_the_gain_at_small_d1() {
    let t = deltapqn_sweep(&[16, 32], &[0.0, 1e-1], &SweepTemplate::default()).unwrap();
    for row in &t.values {
        assert!(row[1] > -2.0, "{row:?}");
        assert!(row[1] > row[0] + 5.0);
    }
}

#[test]
fn rounded_taps_keep_negative_db() {
    let d1 = 32;
    let m = QnModel::reference(d1, 4).unwrap();
    let raw = gcf3_impulse_raw(d1, 0.79 * 2.0 * PI * m.fc).unwrap();
    let q = round_to_error(&raw, 1e-3).unwrap();
    let tf = RealPolynomial::normalized(q.values).unwrap();
    assert!(delta_pqn(&tf, &m).unwrap() < 0.0);
}

#[test]
fn sweep_is_identical_across_execution_modes() {
    let d1s = [8, 16, 32];
    let dhs = [0.0, 1e-4, 1e-2];
    let t = SweepTemplate::default();
    let a = qn::deltapqn_sweep_with(&d1s, &dhs, &t, Execution::Sequential).unwrap();
    let b = qn::deltapqn_sweep_with(&d1s, &dhs, &t, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn psd_order_monotonicity(f in 0.001f64..0.499, b in 1u32..6) {
        let lo = QnModel::new(b, 1.0, 0.01, 4).unwrap();
        let hi = QnModel::new(b + 1, 1.0, 0.01, 4).unwrap();
        let (a, c) = (qn_psd(f, &lo), qn_psd(f, &hi));
        if f > 1.0 / 6.0 + 1e-9 {
            prop_assert!(c > a);
        } else if f < 1.0 / 6.0 - 1e-9 {
            prop_assert!(c < a);
        }
    }

    #[test]
    fn rounding_contract(coeffs in prop::collection::vec(-1e3f64..1e3, 1..50), eps in 1e-9f64..1.0) {
        let q = round_to_error(&coeffs, eps).unwrap();
        prop_assert!(q.step <= 2.0 * eps && q.step > eps);
        for ((v, d), c) in q.values.iter().zip(&q.deltas).zip(&coeffs) {
            prop_assert!(d.abs() <= eps);
            prop_assert!(d.abs() <= q.max_abs_error);
            prop_assert_eq!(v - d, *c);
            prop_assert_eq!(c + d, *v);
        }
    }

    #[test]
    fn on_grid_values_are_untouched(ints in prop::collection::vec(-1000i32..1000, 1..20), k in -12i32..0) {
        let step = 2f64.powi(k);
        let coeffs: Vec<f64> = ints.iter().map(|&i| i as f64 * step).collect();
        let q = round_to_error(&coeffs, step / 2.0).unwrap();
        prop_assert!(q.deltas.iter().all(|d| *d == 0.0));
    }

    #[test]
    fn po2_error_at_least_halves(x in -3.0f64..3.0) {
        let mut previous = x.abs();
        for terms in 1..12 {
            let e = po2_expand(x, terms, 0.0).unwrap();
            let err = e.error.abs();
            prop_assert!(err <= previous / 2.0 || err == 0.0);
            prop_assert_eq!(e.value - x, e.error);
            if err == 0.0 {
                break;
            }
            previous = err;
        }
    }

    #[test]
    fn po2_met_flag_is_truthful(x in -3.9f64..3.9, terms in 1usize..6, eps in 1e-6f64..0.5) {
        let e = po2_expand(x, terms, eps).unwrap();
        prop_assert!(e.terms.len() <= terms);
        prop_assert_eq!(e.met, e.error.abs() <= eps);
    }
}
