use std::f64::consts::PI;

use gcf_core::sensitivity::*;
use gcf_core::*;
use num_complex::Complex64;
use proptest::prelude::*;

const FC: f64 = 1.0 / 256.0;

fn fig_spec() -> CascadeSpec {
    CascadeSpec::new(5, 2, 0.79 * 2.0 * PI * FC).unwrap()
}

fn fig_grid() -> FrequencyGrid {
    FrequencyGrid::with_folding_edges(DEFAULT_GRID_POINTS, 32, FC).unwrap()
}

/// Folding-band index k = round(32 f) of the largest unflagged sample.
fn peak_band(values: &[Complex64], grid: &FrequencyGrid) -> usize {
    let (i, _) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| !is_flagged(v))
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .unwrap();
    (grid.points()[i] * 32.0).round() as usize
}

#[test]
fn passband_is_insensitive() {
    let spec = fig_spec();
    let grid = fig_grid();
    let pert = PerturbationConfig::uniform(&spec, 1e-4, 1e-4);
    let dh = error_function(&spec, &pert, &grid).unwrap().total();
    let pass = max_abs(&dh, &grid.indices_in(0.0, FC));
    let fold = max_abs(&dh, &grid.indices_in(1.0 / 32.0 - FC, 1.0 / 32.0 + FC));
    assert!(20.0 * (fold / pass).log10() >= 20.0);
}

#[test]
fn error_terms_peak_in_their_own_bands() {
    let spec = fig_spec();
    let grid = fig_grid();
    let pert = PerturbationConfig::uniform(&spec, 1e-4, 1e-4);
    let terms = error_function(&spec, &pert, &grid).unwrap();
    // H_P zeros sit at multiples of 1/8, stage u=3 at odd multiples of 1/16,
    // stage u=4 at odd multiples of 1/32.
    assert_eq!(peak_band(&terms.dh1, &grid) % 4, 0);
    assert_eq!(terms.stage_indices, vec![3, 4]);
    assert_eq!(peak_band(&terms.dh2[0], &grid) % 4, 2);
    assert_eq!(peak_band(&terms.dh2[1], &grid) % 2, 1);
}

#[test]
fn first_order_residual_is_quadratic() {
    let spec = fig_spec();
    let grid = fig_grid();
    let deltas = [1e-7, 1e-6, 1e-5];
    let residuals: Vec<f64> = deltas
        .iter()
        .map(|&d| {
            let pert = PerturbationConfig::uniform(&spec, d, d);
            let exact = perturbation_change(&spec, &pert, &grid).unwrap();
            let predicted = first_order_change(&spec, &pert, &grid).unwrap();
            exact
                .iter()
                .zip(&predicted)
                .filter(|(_, p)| !is_flagged(p))
                .map(|(e, p)| (e - p).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    for w in residuals.windows(2) {
        let slope = (w[1] / w[0]).log10();
        assert!((slope - 2.0).abs() <= 0.2, "slope {slope}");
    }
}

#[test]
fn single_stage_first_order_within_one_percent() {
    let spec = fig_spec();
    let grid = FrequencyGrid::uniform(2049).unwrap();
    let nominal = nominal_response(&spec, &grid).unwrap();
    let pert = PerturbationConfig::from_taps(&spec, &[0.0; 22], &[0.0, 1e-6]).unwrap();
    let exact = perturbation_change(&spec, &pert, &grid).unwrap();
    let predicted = first_order_change(&spec, &pert, &grid).unwrap();
    for i in 0..grid.len() {
        if is_flagged(&predicted[i]) || nominal[i].norm() < 1e-6 || exact[i].norm() < 1e-15 {
            continue;
        }
        assert!((predicted[i] - exact[i]).norm() <= 0.01 * exact[i].norm());
    }
}

#[test]
fn parallel_and_sequential_agree() {
    let spec = fig_spec();
    let grid = fig_grid();
    let pert = PerturbationConfig::uniform(&spec, 1e-4, 1e-4);
    let a = error_function_with(&spec, &pert, &grid, Execution::Sequential).unwrap();
    let b = error_function_with(&spec, &pert, &grid, Execution::Parallel).unwrap();
    assert_eq!(format!("{:?}", a.total()), format!("{:?}", b.total()));
    let tf = gcf3_tf_oracle(32, spec.alpha).unwrap();
    assert_eq!(
        freq_response_with(&tf, &grid, Execution::Sequential),
        freq_response_with(&tf, &grid, Execution::Parallel)
    );
}

proptest! {
    #[test]
    fn unit_dc_for_normalized_filters(p in 1u32..7, q in 0.0f64..1.0) {
        let d = 1usize << p;
        let tf = gcf3_tf_oracle(d, q * PI / (4.0 * d as f64)).unwrap();
        let g = FrequencyGrid::new(vec![0.0]).unwrap();
        prop_assert!((freq_response(&tf, &g)[0] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn hn_closed_form_agrees(p in 2u32..8, pp_off in 0i32..6, q in 0.0f64..1.0) {
        let pp = (pp_off % p as i32) - 1;
        let spec = CascadeSpec::new(p, pp, q * PI / (4.0 * (1u64 << p) as f64)).unwrap();
        let grid = FrequencyGrid::uniform(513).unwrap();
        let closed = hn_freq_response(&spec, &grid).unwrap();
        let parts = split(&spec).unwrap();
        let poly = RealPolynomial::new(polyphase::expand_stages(&parts.full_rate_stages(&spec))).unwrap();
        let dc = poly.dc_gain();
        for (a, b) in closed.iter().zip(freq_response(&poly, &grid)) {
            prop_assert!((a - b).norm() < 1e-12 * dc);
        }
    }

    #[test]
    fn grid_invariants(n in 2usize..3000, p in 1u32..8, nu in 2usize..9) {
        let d = 1usize << p;
        let g = FrequencyGrid::with_folding_edges(n, d, 0.5 / (nu * d) as f64).unwrap();
        prop_assert!(g.points().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(g.points().iter().all(|f| (0.0..=0.5).contains(f)));
    }
}
