//! Optimal transductive design: builds target sets, solves
//! `min_w max_{b∈B} ‖b‖²_{V_w⁻¹}` by Frank-Wolfe and by a saddle-point
//! Frank-Wolfe variant, and derives the characteristic time `T*(θ)`, the
//! G and XY complexities and instance lower bounds `T_w`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{argmax_lowest, rank_one_inverse_update, ArmSet, DesignMatrix, SimplexWeights};
use crate::problems::{correct_answer, min_gap, Answer, ProblemSpec, DEGENERACY_TOL};

/// Ridge used when re-evaluating the final design value of weights that
/// leave some target direction outside the covered span.
const FINAL_VALUE_RIDGE: f64 = 1e-12;

/// A generic transductive design instance: pullable arms and the target
/// directions whose uncertainty the design must control.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    arms: ArmSet,
    targets: Vec<DVector<f64>>,
}

impl DesignProblem {
    pub fn new(arms: ArmSet, targets: Vec<DVector<f64>>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidParameter(
                "design needs a nonempty target set".into(),
            ));
        }
        if let Some(bad) = targets.iter().position(|b| b.len() != arms.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "target {bad} has dimension {}, expected {}",
                targets[bad].len(),
                arms.dim()
            )));
        }
        // every target must be estimable from the arms
        let stacked = DMatrix::from_columns(arms.arms());
        let svd = stacked.clone().svd(true, true);
        for (i, b) in targets.iter().enumerate() {
            let coeffs = svd
                .solve(b, 1e-12)
                .map_err(|e| Error::InvalidParameter(e.into()))?;
            let resid = (&stacked * coeffs - b).norm();
            if resid > 1e-8 * b.norm() {
                return Err(Error::InvalidParameter(format!(
                    "target {i} is outside the span of the arms (residual {resid:.3e})"
                )));
            }
        }
        Ok(Self { arms, targets })
    }

    pub fn arms(&self) -> &ArmSet {
        &self.arms
    }

    pub fn targets(&self) -> &[DVector<f64>] {
        &self.targets
    }
}

/// Result of one design solve.
#[derive(Debug, Clone)]
pub struct DesignSolution {
    pub weights: SimplexWeights,
    /// `max_b ‖b‖²_{V_w⁻¹}` recomputed fresh from the averaged weights.
    pub value: f64,
    pub iterations: usize,
    /// Per-checkpoint value trace (traced variants only).
    pub history: Option<Vec<f64>>,
}

/// Which transductive set to build for a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransductiveKind {
    /// The arm set itself (G-optimal design).
    G,
    /// All difference directions `a − a'`.
    Xy,
    /// Gap-normalized best-candidate directions `(a*−a)/|⟨θ, a*−a⟩|`.
    AbStar,
    /// Threshold directions `a / |ι − ⟨θ,a⟩|`.
    ThresholdIota,
}

/// Builds the transductive set for `spec` at `θ`.
pub fn build_transductive_set(
    spec: &ProblemSpec,
    theta: &DVector<f64>,
    kind: TransductiveKind,
) -> Result<Vec<DVector<f64>>> {
    match kind {
        TransductiveKind::G => Ok(spec.arms().arms().to_vec()),
        TransductiveKind::Xy => {
            let arms = spec.arms().arms();
            let mut dirs = Vec::with_capacity(arms.len() * (arms.len() - 1));
            for (i, a) in arms.iter().enumerate() {
                for (j, b) in arms.iter().enumerate() {
                    if i != j {
                        dirs.push(a - b);
                    }
                }
            }
            Ok(dirs)
        }
        TransductiveKind::AbStar => {
            let Answer::Arm(best) = correct_answer(spec, theta)? else {
                return Err(Error::Precondition("AB* needs a BAI kind".into()));
            };
            let vectors = spec.answer_vectors();
            let top = &vectors[best];
            let mut dirs = Vec::with_capacity(vectors.len() - 1);
            for (j, v) in vectors.iter().enumerate() {
                if j == best {
                    continue;
                }
                let gap = theta.dot(top) - theta.dot(v);
                if gap.abs() <= DEGENERACY_TOL {
                    return Err(Error::DegenerateParameter(format!(
                        "zero gap at candidate {j}"
                    )));
                }
                dirs.push((top - v) / gap.abs());
            }
            Ok(dirs)
        }
        TransductiveKind::ThresholdIota => {
            let Some(iota) = spec.threshold_level() else {
                return Err(Error::Precondition("threshold set needs a level ι".into()));
            };
            spec.answer_vectors()
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let gap = iota - theta.dot(v);
                    if gap.abs() <= DEGENERACY_TOL {
                        return Err(Error::DegenerateParameter(format!(
                            "candidate {j} sits on the threshold"
                        )));
                    }
                    Ok(v / gap.abs())
                })
                .collect()
        }
    }
}

/// `max_b ‖b‖²_{V_w⁻¹}` at fixed weights; `+∞` when some target leaves the
/// range of `V_w`.
pub fn design_value(problem: &DesignProblem, weights: &[f64]) -> f64 {
    let v = match DesignMatrix::from_weights(problem.arms(), weights) {
        Ok(v) => v,
        Err(_) => return f64::INFINITY,
    };
    problem
        .targets()
        .iter()
        .map(|b| v.quad_inverse(b))
        .fold(0.0, f64::max)
}

fn final_value(problem: &DesignProblem, weights: &[f64]) -> f64 {
    let raw = design_value(problem, weights);
    if raw.is_finite() {
        return raw;
    }
    let v = DesignMatrix::from_weights(problem.arms(), weights)
        .expect("weights validated by solver")
        .with_ridge(FINAL_VALUE_RIDGE);
    problem
        .targets()
        .iter()
        .map(|b| v.quad_inverse(b))
        .fold(0.0, f64::max)
}

fn averaged_step(weights: &mut [f64], chosen: usize, t: usize) {
    let tf = t as f64;
    for (i, w) in weights.iter_mut().enumerate() {
        *w = (tf * *w + f64::from(i == chosen)) / (tf + 1.0);
    }
}

fn run_fw(
    problem: &DesignProblem,
    max_iter: usize,
    trace_stride: Option<usize>,
) -> Result<DesignSolution> {
    if max_iter == 0 {
        return Err(Error::InvalidParameter("solver needs max_iter ≥ 1".into()));
    }
    let arms = problem.arms();
    let d = arms.dim();
    let mut vinv = DMatrix::<f64>::identity(d, d);
    let mut weights = vec![1.0; arms.len()];
    let mut history = trace_stride.map(|_| Vec::new());
    let mut scores = vec![0.0; arms.len()];
    for t in 0..max_iter {
        // ã ∈ argmax_a max_b ⟨a,b⟩²_{V⁻¹}
        scores.iter_mut().for_each(|s| *s = 0.0);
        for b in problem.targets() {
            let u = &vinv * b;
            for (s, a) in scores.iter_mut().zip(arms.iter()) {
                *s = f64::max(*s, a.dot(&u).powi(2));
            }
        }
        let chosen = argmax_lowest(&scores);
        vinv = rank_one_inverse_update(&vinv, arms.arm(chosen));
        averaged_step(&mut weights, chosen, t);
        if let (Some(h), Some(stride)) = (history.as_mut(), trace_stride) {
            if (t + 1) % stride == 0 {
                h.push(final_value(problem, &weights));
            }
        }
    }
    let value = final_value(problem, &weights);
    Ok(DesignSolution {
        weights: SimplexWeights::new(weights)?,
        value,
        iterations: max_iter,
        history,
    })
}

/// Frank-Wolfe heuristic for the generic design problem: starting from
/// `V = I`, repeatedly add the arm maximizing `max_b ⟨a,b⟩²_{V⁻¹}` and
/// average the chosen indices into the weights.
pub fn fw_design(problem: &DesignProblem, max_iter: usize) -> Result<DesignSolution> {
    run_fw(problem, max_iter, None)
}

pub fn fw_design_traced(
    problem: &DesignProblem,
    max_iter: usize,
    stride: usize,
) -> Result<DesignSolution> {
    run_fw(problem, max_iter, Some(stride.max(1)))
}

fn run_saddle_fw(
    problem: &DesignProblem,
    max_iter: usize,
    trace_stride: Option<usize>,
) -> Result<DesignSolution> {
    if max_iter == 0 {
        return Err(Error::InvalidParameter("solver needs max_iter ≥ 1".into()));
    }
    let arms = problem.arms();
    let d = arms.dim();
    let mut vinv = DMatrix::<f64>::identity(d, d);
    let mut vtilde = DMatrix::<f64>::identity(d, d);
    let mut weights = vec![1.0; arms.len()];
    let mut history = trace_stride.map(|_| Vec::new());
    for t in 0..max_iter {
        // ã ∈ argmax_a ‖a‖²_{V⁻¹ Ṽ V⁻¹}: the target counter Ṽ tilts the
        // arm pick toward directions nature has been stressing
        let mid = &vinv * &vtilde * &vinv;
        let arm_scores: Vec<f64> = arms
            .iter()
            .map(|a| (a.transpose() * &mid * a)[(0, 0)])
            .collect();
        let chosen = argmax_lowest(&arm_scores);
        let target_scores: Vec<f64> = problem
            .targets()
            .iter()
            .map(|b| (b.transpose() * &vinv * b)[(0, 0)])
            .collect();
        let stressed = argmax_lowest(&target_scores);
        vinv = rank_one_inverse_update(&vinv, arms.arm(chosen));
        let b = &problem.targets()[stressed];
        for i in 0..d {
            for j in 0..d {
                vtilde[(i, j)] += b[i] * b[j];
            }
        }
        averaged_step(&mut weights, chosen, t);
        if let (Some(h), Some(stride)) = (history.as_mut(), trace_stride) {
            if (t + 1) % stride == 0 {
                h.push(final_value(problem, &weights));
            }
        }
    }
    let value = final_value(problem, &weights);
    Ok(DesignSolution {
        weights: SimplexWeights::new(weights)?,
        value,
        iterations: max_iter,
        history,
    })
}

/// Saddle-point Frank-Wolfe: alongside the design counter `V` it grows a
/// counter `Ṽ` over the most-stressed targets, which repairs the plain
/// heuristic's failure to converge on some gap-normalized instances.
pub fn saddle_fw_design(problem: &DesignProblem, max_iter: usize) -> Result<DesignSolution> {
    run_saddle_fw(problem, max_iter, None)
}

pub fn saddle_fw_design_traced(
    problem: &DesignProblem,
    max_iter: usize,
    stride: usize,
) -> Result<DesignSolution> {
    run_saddle_fw(problem, max_iter, Some(stride.max(1)))
}

/// `T*(θ)` and its optimal weights: twice the gap-normalized design value
/// (`AB*` for BAI kinds, the `ι`-scaled set for threshold kinds).
pub fn characteristic_time(
    spec: &ProblemSpec,
    theta: &DVector<f64>,
    solver_iters: usize,
) -> Result<(f64, SimplexWeights)> {
    let kind = if spec.kind().is_bai() {
        TransductiveKind::AbStar
    } else {
        TransductiveKind::ThresholdIota
    };
    let targets = build_transductive_set(spec, theta, kind)?;
    let problem = DesignProblem::new(spec.arms().clone(), targets)?;
    let solution = saddle_fw_design(&problem, solver_iters)?;
    Ok((2.0 * solution.value, solution.weights))
}

/// Instance lower bound when tracking fixed proportions `w`:
/// `T_w = log(1/δ) / min_{a≠a*} ⟨θ,a*−a⟩² / (2‖a*−a‖²_{V_w⁻¹})`.
pub fn lower_bound_time(
    spec: &ProblemSpec,
    theta: &DVector<f64>,
    weights: &SimplexWeights,
    delta: f64,
) -> Result<f64> {
    if !spec.kind().is_bai() {
        return Err(Error::Precondition("T_w is defined for BAI kinds".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter("delta must lie in (0, 1]".into()));
    }
    let Answer::Arm(best) = correct_answer(spec, theta)? else {
        unreachable!()
    };
    let vectors = spec.answer_vectors();
    let v = DesignMatrix::from_weights(spec.arms(), weights.as_slice())?;
    let mut min_rate = f64::INFINITY;
    for (j, a) in vectors.iter().enumerate() {
        if j == best {
            continue;
        }
        let dir = &vectors[best] - a;
        let gap = theta.dot(&dir);
        let norm2 = v.quad_inverse(&dir);
        let rate = if norm2.is_finite() {
            gap * gap / (2.0 * norm2)
        } else {
            0.0
        };
        min_rate = min_rate.min(rate);
    }
    Ok((1.0 / delta).ln() / min_rate)
}

/// The complexity quantities of one BAI instance side by side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub delta: f64,
    pub delta_min: f64,
    /// `T*(θ)` from the saddle solver.
    pub t_star: f64,
    /// G-optimal design value (Kiefer-Wolfowitz: equals `d`).
    pub g_value: f64,
    /// XY (difference-direction) design value.
    pub xy_value: f64,
    /// The chain `T* ≤ 2·XY/Δ² ≤ 8·G/Δ² = 8d/Δ²`.
    pub chain: ChainBounds,
    pub weights: DesignWeights,
    /// `T_w` at each design's weights.
    pub lower_bounds: LowerBoundTimes,
    pub solver_iters: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainBounds {
    pub t_star: f64,
    pub xy_bound: f64,
    pub g_bound: f64,
    /// `8d/Δmin²`, the Kiefer-Wolfowitz value of `g_bound`.
    pub g_identity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignWeights {
    pub ab_star: Vec<f64>,
    pub xy: Vec<f64>,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowerBoundTimes {
    pub ab_star: f64,
    pub xy: f64,
    pub g: f64,
}

/// Solver slack tolerated when asserting the complexity chain.
const CHAIN_SLACK: f64 = 0.02;

/// Computes `T*`, G, XY, `Δmin`, the chain bounds, per-design optimal
/// weights and `T_w` for each, asserting the chain ordering before
/// returning.
pub fn complexity_report(
    spec: &ProblemSpec,
    theta: &DVector<f64>,
    delta: f64,
    solver_iters: usize,
) -> Result<ComplexityReport> {
    if !spec.kind().is_bai() {
        return Err(Error::Precondition(
            "complexity_report is defined for BAI kinds".into(),
        ));
    }
    let delta_min = min_gap(spec, theta)?;
    let (t_star, w_ab) = characteristic_time(spec, theta, solver_iters)?;
    let g_problem = DesignProblem::new(
        spec.arms().clone(),
        build_transductive_set(spec, theta, TransductiveKind::G)?,
    )?;
    let g_sol = saddle_fw_design(&g_problem, solver_iters)?;
    let xy_problem = DesignProblem::new(
        spec.arms().clone(),
        build_transductive_set(spec, theta, TransductiveKind::Xy)?,
    )?;
    let xy_sol = saddle_fw_design(&xy_problem, solver_iters)?;

    let d2 = delta_min * delta_min;
    let chain = ChainBounds {
        t_star,
        xy_bound: 2.0 * xy_sol.value / d2,
        g_bound: 8.0 * g_sol.value / d2,
        g_identity: 8.0 * spec.dim() as f64 / d2,
    };
    if t_star > chain.xy_bound * (1.0 + CHAIN_SLACK)
        || chain.xy_bound > chain.g_bound * (1.0 + CHAIN_SLACK)
    {
        return Err(Error::InternalConsistency(format!(
            "complexity chain violated: T* = {t_star}, 2XY/Δ² = {}, 8G/Δ² = {}",
            chain.xy_bound, chain.g_bound
        )));
    }
    let lower_bounds = LowerBoundTimes {
        ab_star: lower_bound_time(spec, theta, &w_ab, delta)?,
        xy: lower_bound_time(spec, theta, &xy_sol.weights, delta)?,
        g: lower_bound_time(spec, theta, &g_sol.weights, delta)?,
    };
    Ok(ComplexityReport {
        delta,
        delta_min,
        t_star,
        g_value: g_sol.value,
        xy_value: xy_sol.value,
        chain,
        weights: DesignWeights {
            ab_star: w_ab.into_vec(),
            xy: xy_sol.weights.into_vec(),
            g: g_sol.weights.into_vec(),
        },
        lower_bounds,
        solver_iters,
    })
}
