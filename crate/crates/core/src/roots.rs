//! Polynomial roots by Aberth–Ehrlich simultaneous iteration, and
//! root-to-root matching.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, GcfError, Result};
use crate::poly::RealPolynomial;

/// Accepted relative (backward) residual |p(z)| / Σ|a_k||z|^k.
pub const ROOT_RESIDUAL: f64 = 1e-10;

const MAX_ITERATIONS: usize = 1000;

/// p(z) and p'(z) for p(z) = Σ a_k z^{n-k} (descending coefficients),
/// together with the scale Σ|a_k||z|^{n-k}.
fn horner(a: &[f64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::new(a[0], 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut scale = a[0].abs();
    let r = z.norm();
    for &c in &a[1..] {
        dp = dp * z + p;
        p = p * z + c;
        scale = scale * r + c.abs();
    }
    (p, dp, scale)
}

/// Newton correction p/p'. Outside the unit disk the reversed polynomial is
/// evaluated at 1/z, which keeps Horner well scaled.
fn newton_ratio(a: &[f64], rev: &[f64], z: Complex64) -> Complex64 {
    if z.norm() <= 1.0 {
        let (p, dp, _) = horner(a, z);
        return p / dp;
    }
    let n = (a.len() - 1) as f64;
    let w = z.inv();
    let (q, dq, _) = horner(rev, w);
    // p(z) = z^n q(1/z)  =>  p'/p = n/z - q'(w) w² / q(w)
    let log_deriv = n * w - dq * w * w / q;
    log_deriv.inv()
}

fn backward_error(a: &[f64], z: Complex64) -> f64 {
    let (p, _, scale) = if z.norm() <= 1.0 {
        horner(a, z)
    } else {
        let rev: Vec<f64> = a.iter().rev().copied().collect();
        horner(&rev, z.inv())
    };
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

/// All roots of Σ c_k z^{-k} (ascending powers of z^-1), i.e. of the
/// polynomial z^n Σ c_k z^{-k}. Conjugate pairs are symmetrized.
pub fn polynomial_roots(poly: &RealPolynomial) -> Result<Vec<Complex64>> {
    // Trailing zeros in z^-1 are roots at the origin.
    let coeffs = poly.coeffs();
    let trailing = coeffs.iter().rev().take_while(|c| **c == 0.0).count();
    let a = &coeffs[..coeffs.len() - trailing];
    let n = a.len() - 1;
    let mut roots = vec![Complex64::new(0.0, 0.0); trailing];
    if n == 0 {
        if roots.is_empty() {
            return invalid("polynomial has degree 0 and no roots");
        }
        return Ok(roots);
    }
    let rev: Vec<f64> = a.iter().rev().copied().collect();

    let radius = (a[n] / a[0]).abs().powf(1.0 / n as f64);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && done.iter().any(|d| !d) {
        iterations += 1;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let ratio = newton_ratio(a, &rev, z[i]);
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                done[i] = true;
                continue;
            }
            z[i] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[i].norm().max(1e-300) {
                done[i] = true;
            }
        }
    }

    let max_residual = z.iter().map(|&r| backward_error(a, r)).fold(0.0, f64::max);
    if max_residual.is_nan() || max_residual > ROOT_RESIDUAL {
        return Err(GcfError::NoConvergence {
            iterations,
            max_residual,
        });
    }
    pair_conjugates(&mut z);
    roots.extend(z);
    Ok(roots)
}

/// Makes conjugate partners exact mirror images: each root in the upper
/// half-plane is paired with the nearest unused root in the lower one.
fn pair_conjugates(z: &mut [Complex64]) {
    let mut upper: Vec<usize> = (0..z.len()).filter(|&i| z[i].im > 0.0).collect();
    upper.sort_by(|&a, &b| z[b].im.total_cmp(&z[a].im));
    let mut lower: Vec<usize> = (0..z.len()).filter(|&i| z[i].im < 0.0).collect();
    for i in upper {
        let target = z[i].conj();
        let Some(pos) = (0..lower.len()).min_by(|&a, &b| {
            (z[lower[a]] - target)
                .norm()
                .total_cmp(&(z[lower[b]] - target).norm())
        }) else {
            break;
        };
        let j = lower.swap_remove(pos);
        let mid = (z[i] + z[j].conj()) / 2.0;
        z[i] = mid;
        z[j] = mid.conj();
    }
}

/// For each `reference` point, the index of its partner in `candidates`
/// (same length). Nearest neighbour when that is a bijection, otherwise a
/// minimum-total-distance assignment.
pub fn match_points(reference: &[Complex64], candidates: &[Complex64]) -> Result<Vec<usize>> {
    if reference.len() != candidates.len() {
        return Err(GcfError::LengthMismatch {
            expected: reference.len(),
            got: candidates.len(),
        });
    }
    let nearest: Vec<usize> = reference
        .iter()
        .map(|r| {
            (0..candidates.len())
                .min_by(|&a, &b| {
                    (candidates[a] - r)
                        .norm()
                        .total_cmp(&(candidates[b] - r).norm())
                })
                .unwrap_or(0)
        })
        .collect();
    let mut seen = vec![false; candidates.len()];
    if nearest
        .iter()
        .all(|&j| !std::mem::replace(&mut seen[j], true))
    {
        return Ok(nearest);
    }
    let cost: Vec<Vec<f64>> = reference
        .iter()
        .map(|r| candidates.iter().map(|c| (c - r).norm()).collect())
        .collect();
    Ok(hungarian(&cost))
}

/// Minimum-cost perfect assignment on a square cost matrix (O(n³)
/// shortest augmenting path). Returns the column assigned to each row.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based potentials and matching, column 0 is a sentinel.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut min_v = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < min_v[j] {
                    min_v[j] = cur;
                    way[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    col_of
}
