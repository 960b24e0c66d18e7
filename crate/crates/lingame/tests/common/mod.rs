//! Independent oracles shared by the integration suites: dense grid
//! minimizers, a projected-gradient primal solver, and simplex grid search.
//! Everything here recomputes values from first principles, without going
//! through the closed forms it is used to check.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

use lingame::problems::Halfspace;

/// `½‖θ−λ‖²_V` minimized over one halfspace by dense grid search with
/// zooming stages. On a convex quadratic, the grid argmin sits within
/// `step·√cond(V)` of the true minimizer (thin-valley bound), so each zoom
/// window is sized from the condition number to provably contain it.
pub fn grid_halfspace_min(
    theta: &DVector<f64>,
    hs: &Halfspace,
    v: &DMatrix<f64>,
    half_width: f64,
) -> f64 {
    let objective = |lam: &DVector<f64>| {
        let d = lam - theta;
        0.5 * (d.transpose() * v * &d)[(0, 0)]
    };
    let feasible = |lam: &DVector<f64>| lam.dot(&hs.normal) >= hs.offset - 1e-15;
    let eigs = v.clone().symmetric_eigenvalues();
    let lmax = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lmin = eigs
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        .max(1e-12);
    let safety = 2.0 * (1.0 + (lmax / lmin).sqrt());

    let mut center = theta.clone();
    let mut width = half_width;
    let mut best = f64::INFINITY;
    for _stage in 0..5 {
        let step = width / 400.0;
        let mut best_point = center.clone();
        for i in 0..=800i64 {
            for j in 0..=800i64 {
                let lam = DVector::from_vec(vec![
                    center[0] - width + i as f64 * step,
                    center[1] - width + j as f64 * step,
                ]);
                if feasible(&lam) {
                    let val = objective(&lam);
                    if val < best {
                        best = val;
                        best_point = lam;
                    }
                }
            }
        }
        center = best_point;
        width = (step * safety).min(width / 4.0);
    }
    // The constrained minimum sits on the boundary line whenever θ is
    // infeasible; a fine 1-D scan along it removes the O(√step) localization
    // loss of the area grid. Scanned points are feasible, so taking the min
    // keeps this a valid upper-bound oracle.
    let y = &hs.normal;
    let y2 = y.dot(y);
    if y2 > 0.0 {
        let base = y * (hs.offset / y2);
        let tangent = DVector::from_vec(vec![-y[1], y[0]]) / y2.sqrt();
        let mut t_center = 0.0;
        let mut t_width = 2.0 * half_width;
        for _stage in 0..4 {
            let t_step = t_width / 100_000.0;
            let mut best_t = t_center;
            for i in 0..=200_000i64 {
                let t = t_center - t_width + i as f64 * t_step;
                let lam = &base + &tangent * t;
                let val = objective(&lam);
                if val < best {
                    best = val;
                    best_t = t;
                }
            }
            t_center = best_t;
            t_width = (t_step * 10.0).min(t_width / 4.0);
        }
    }
    best
}

/// Grid minimization of `½‖θ−λ‖²_V` over a union of halfspaces.
pub fn grid_alternative_min(
    theta: &DVector<f64>,
    halfspaces: &[Halfspace],
    v: &DMatrix<f64>,
    half_width: f64,
) -> f64 {
    halfspaces
        .iter()
        .map(|hs| grid_halfspace_min(theta, hs, v, half_width))
        .fold(f64::INFINITY, f64::min)
}

/// Projected-gradient solver for the bounded primal
/// `min ½‖θ−λ‖²_V  s.t.  ⟨λ, y⟩ ≤ 0, ‖λ‖ ≤ M`,
/// with Dykstra's alternating projections onto the two convex sets.
pub fn projected_gradient_bounded(
    theta: &DVector<f64>,
    y: &DVector<f64>,
    v: &DMatrix<f64>,
    m: f64,
    iterations: usize,
) -> f64 {
    let d = theta.len();
    let project = |x: &DVector<f64>| -> DVector<f64> {
        // Dykstra onto {⟨λ,y⟩ ≤ 0} ∩ {‖λ‖ ≤ M}
        let mut lam = x.clone();
        let mut p = DVector::<f64>::zeros(d);
        let mut q = DVector::<f64>::zeros(d);
        for _ in 0..200 {
            let z = &lam + &p;
            let proj1 = if z.dot(y) > 0.0 {
                &z - y * (z.dot(y) / y.dot(y))
            } else {
                z.clone()
            };
            p = z - &proj1;
            let z2 = &proj1 + &q;
            let n = z2.norm();
            let proj2 = if n > m { &z2 * (m / n) } else { z2.clone() };
            q = z2 - &proj2;
            if (&proj2 - &lam).norm() < 1e-14 {
                lam = proj2;
                break;
            }
            lam = proj2;
        }
        lam
    };
    let lipschitz = v
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .max(1e-12);
    let step = 1.0 / lipschitz;
    let mut lam = project(&DVector::zeros(d));
    for _ in 0..iterations {
        let grad = v * (&lam - theta);
        lam = project(&(lam - grad * step));
    }
    let diff = &lam - theta;
    0.5 * (diff.transpose() * v * &diff)[(0, 0)]
}

/// Exhaustive simplex-grid minimization of `max_b ‖b‖²_{V_w⁻¹}` with the
/// given step, for 2 to 4 arms.
pub fn simplex_grid_design_min(arms: &[DVector<f64>], targets: &[DVector<f64>], step: f64) -> f64 {
    let a = arms.len();
    assert!((2..=4).contains(&a), "grid oracle supports 2..=4 arms");
    let d = arms[0].len();
    let value = |w: &[f64]| -> f64 {
        let mut v = DMatrix::<f64>::zeros(d, d);
        for (wi, arm) in w.iter().zip(arms) {
            for r in 0..d {
                for c in 0..d {
                    v[(r, c)] += wi * arm[r] * arm[c];
                }
            }
        }
        match v.cholesky() {
            None => f64::INFINITY,
            Some(chol) => targets
                .iter()
                .map(|b| b.dot(&chol.solve(b)))
                .fold(0.0, f64::max),
        }
    };
    let mut best = f64::INFINITY;
    let n = (1.0 / step).round() as i64;
    match a {
        2 => {
            for i in 1..n {
                let w1 = i as f64 * step;
                best = best.min(value(&[w1, 1.0 - w1]));
            }
        }
        3 => {
            for i in 1..n {
                for j in 1..(n - i) {
                    let (w1, w2) = (i as f64 * step, j as f64 * step);
                    best = best.min(value(&[w1, w2, 1.0 - w1 - w2]));
                }
            }
        }
        4 => {
            for i in 1..n {
                for j in 1..(n - i) {
                    for k in 1..(n - i - j) {
                        let (w1, w2, w3) = (i as f64 * step, j as f64 * step, k as f64 * step);
                        best = best.min(value(&[w1, w2, w3, 1.0 - w1 - w2 - w3]));
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    best
}
