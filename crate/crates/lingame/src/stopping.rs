//! GLR stopping: the statistic, the `β(t,δ)` threshold and the exploration
//! rate `h(t) = β(t, t^{-α})`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::DesignMatrix;
use crate::problems::{candidate_answer, is_degenerate, nature_best_response, Answer, ProblemSpec};

/// Parameters of the stopping threshold.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdParams {
    /// Ambient dimension `d`.
    pub dim: usize,
    /// Arm norm bound `L`.
    pub arm_norm_bound: f64,
    /// Regularization `η` of the least-squares estimator.
    pub eta: f64,
    /// Parameter norm bound `M`.
    pub param_norm_bound: f64,
    /// Exponent `α` of the exploration rate (`> 2`; default 3).
    pub alpha_explore: f64,
}

impl ThresholdParams {
    pub fn new(
        dim: usize,
        arm_norm_bound: f64,
        eta: f64,
        param_norm_bound: f64,
        alpha_explore: f64,
    ) -> Result<Self> {
        if !eta.is_finite() || eta <= 0.0 {
            return Err(Error::InvalidParameter("eta must be > 0".into()));
        }
        if !param_norm_bound.is_finite() || param_norm_bound <= 0.0 {
            return Err(Error::InvalidParameter("M must be > 0".into()));
        }
        if !arm_norm_bound.is_finite() || arm_norm_bound <= 0.0 {
            return Err(Error::InvalidParameter("L must be > 0".into()));
        }
        if !alpha_explore.is_finite() || alpha_explore <= 2.0 {
            return Err(Error::InvalidParameter("alpha_explore must be > 2".into()));
        }
        Ok(Self {
            dim,
            arm_norm_bound,
            eta,
            param_norm_bound,
            alpha_explore,
        })
    }
}

/// The stopping threshold
/// `β(t,δ) = (√(log(1/δ) + (d/2)·log(1 + tL²/(ηd))) + √(η/2)·M)²`.
pub fn beta_threshold(t: u64, delta: f64, p: &ThresholdParams) -> f64 {
    debug_assert!(delta > 0.0 && delta < 1.0, "beta_threshold needs δ ∈ (0,1)");
    let d = p.dim as f64;
    let inner = (1.0 / delta).ln()
        + 0.5 * d * (1.0 + t as f64 * p.arm_norm_bound.powi(2) / (p.eta * d)).ln();
    let root = inner.sqrt() + (p.eta / 2.0).sqrt() * p.param_norm_bound;
    root * root
}

/// Exploration rate `h(t) = β(t, t^{-α})`. At `t = 1` the nominal
/// `δ_eff = 1` falls outside `(0,1)`; it is clamped to
/// `min(t^{-α}, 1/2)`, which affects round one only.
pub fn exploration_rate(t: u64, p: &ThresholdParams) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidParameter(
            "exploration rate is defined for t ≥ 1".into(),
        ));
    }
    let delta_eff = (t as f64).powf(-p.alpha_explore).min(0.5);
    Ok(beta_threshold(t, delta_eff, p))
}

/// Outcome of one stopping check.
#[derive(Debug, Clone)]
pub struct StopDecision {
    pub stop: bool,
    /// Candidate answer `i*(θ̂)`; meaningful as the returned answer when
    /// `stop` is true (any positive statistic certifies non-degeneracy).
    pub answer: Answer,
    /// `max_i inf_{λ∈¬i} ½‖θ̂−λ‖²_{V_N}`.
    pub statistic: f64,
}

/// GLR stopping check at the state `(θ̂, N)` with confidence `δ`.
///
/// The max over answers is achieved at `i*(θ̂)` (every other answer has
/// `θ̂ ∈ ¬i`, giving value 0), so the statistic is nature's best response at
/// the candidate answer with the raw counts as design weights — without the
/// `ηI` ridge, exactly as the stopping rule is stated. Degenerate `θ̂` yields
/// statistic 0 and no stop.
pub fn glr_stopping(
    spec: &ProblemSpec,
    theta_hat: &DVector<f64>,
    counts: &[u64],
    delta: f64,
    p: &ThresholdParams,
) -> Result<StopDecision> {
    if counts.len() != spec.arms().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} counts for {} arms",
            counts.len(),
            spec.arms().len()
        )));
    }
    let t: u64 = counts.iter().sum();
    let answer = candidate_answer(spec, theta_hat);
    if is_degenerate(spec, theta_hat) {
        return Ok(StopDecision {
            stop: false,
            answer,
            statistic: 0.0,
        });
    }
    let weights: Vec<f64> = counts.iter().map(|c| *c as f64).collect();
    let response = nature_best_response(spec, theta_hat, &answer, &weights)?;
    let statistic = response.value;
    let stop = statistic > beta_threshold(t, delta, p);
    Ok(StopDecision {
        stop,
        answer,
        statistic,
    })
}

/// Closed-form BAI statistic used as a cross-check:
/// `min_{i≠i*} ⟨θ̂, a_i − a*⟩² · 1{⟨θ̂, a* − a_i⟩ ≥ 0} / (2‖a_i − a*‖²_{V_N⁻¹})`.
pub fn bai_closed_form_statistic(
    spec: &ProblemSpec,
    theta_hat: &DVector<f64>,
    counts: &[u64],
) -> Result<f64> {
    let v = DesignMatrix::from_counts(spec.arms(), counts)?;
    let vectors = spec.answer_vectors();
    let Answer::Arm(best) = candidate_answer(spec, theta_hat) else {
        return Err(Error::Precondition(
            "closed form applies to BAI kinds".into(),
        ));
    };
    let mut min_val = f64::INFINITY;
    for (j, a) in vectors.iter().enumerate() {
        if j == best {
            continue;
        }
        let dir = a - &vectors[best];
        let gap = -theta_hat.dot(&dir);
        let val = if gap < 0.0 {
            0.0
        } else {
            let ny2 = v.quad_inverse(&dir);
            if ny2.is_finite() {
                gap * gap / (2.0 * ny2)
            } else {
                0.0
            }
        };
        min_val = min_val.min(val);
    }
    Ok(min_val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ProblemKind;
    use crate::testkit::{canonical, counterexample_arms, random_spanning_arms, vec2};
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn params() -> ThresholdParams {
        ThresholdParams::new(2, 1.0, 1.0, 1.0, 3.0).unwrap()
    }

    #[test]
    fn beta_at_zero_closed_form() {
        let p = params();
        let delta = 0.1;
        let expected = ((1.0f64 / delta).ln().sqrt() + (0.5f64).sqrt()).powi(2);
        assert_relative_eq!(beta_threshold(0, delta, &p), expected, max_relative = 1e-14);
        // high-precision evaluation of the t = 0 closed form
        assert_relative_eq!(
            beta_threshold(0, delta, &p),
            4.948551119283394,
            max_relative = 1e-12
        );
    }

    #[test]
    fn beta_monotone_in_t_and_confidence() {
        let p = params();
        let mut prev = 0.0;
        for t in 0..100 {
            let b = beta_threshold(t, 0.05, &p);
            assert!(b > prev);
            prev = b;
        }
        let mut prev = 0.0;
        for k in 1..100 {
            let delta = 1.0 / (1.0 + k as f64);
            let b = beta_threshold(10, delta, &p);
            assert!(b > prev);
            prev = b;
        }
    }

    #[test]
    fn beta_dominates_log_term() {
        let p = params();
        for t in [0u64, 5, 50, 5000] {
            for delta in [0.5, 0.1, 1e-4] {
                assert!(beta_threshold(t, delta, &p) >= (1.0 / delta).ln());
            }
        }
    }

    #[test]
    fn exploration_rate_round_one_clamp() {
        let p = params();
        assert_relative_eq!(
            exploration_rate(1, &p).unwrap(),
            beta_threshold(1, 0.5, &p),
            max_relative = 1e-14
        );
        assert!(exploration_rate(0, &p).is_err());
    }

    #[test]
    fn exploration_rate_direct_substitution() {
        let p = params();
        assert_relative_eq!(
            exploration_rate(10, &p).unwrap(),
            beta_threshold(10, 1e-3, &p),
            max_relative = 1e-14
        );
    }

    #[test]
    fn exploration_rate_nondecreasing() {
        let p = params();
        let mut prev = exploration_rate(2, &p).unwrap();
        for t in 3..200 {
            let h = exploration_rate(t, &p).unwrap();
            assert!(h >= prev);
            prev = h;
        }
    }

    #[test]
    fn glr_two_arm_statistic() {
        let spec = crate::problems::ProblemSpec::bai(canonical(2)).unwrap();
        let p = params();
        for n in [1u64, 4, 100] {
            let d = glr_stopping(&spec, &vec2(1.0, 0.0), &[n, n], 0.1, &p).unwrap();
            assert_relative_eq!(d.statistic, n as f64 / 4.0, max_relative = 1e-10);
            assert_eq!(d.answer, crate::problems::Answer::Arm(0));
        }
    }

    #[test]
    fn glr_singular_counts_no_stop() {
        let spec = crate::problems::ProblemSpec::bai(canonical(2)).unwrap();
        let p = params();
        // only arm 0 pulled: competitor direction e2−e1 leaves range(V_N)
        let d = glr_stopping(&spec, &vec2(1.0, -0.2), &[50, 0], 1e-6, &p).unwrap();
        assert_eq!(d.statistic, 0.0);
        assert!(!d.stop);
    }

    #[test]
    fn glr_degenerate_theta_no_stop() {
        let spec = crate::problems::ProblemSpec::bai(canonical(2)).unwrap();
        let p = params();
        let d = glr_stopping(&spec, &vec2(0.0, 0.0), &[3, 3], 0.1, &p).unwrap();
        assert_eq!(d.statistic, 0.0);
        assert!(!d.stop);
    }

    #[test]
    fn glr_matches_closed_form_on_random_states() {
        let mut rng = StdRng::seed_from_u64(100);
        let p3 = ThresholdParams::new(3, 2.0, 1.0, 1.0, 3.0).unwrap();
        for _ in 0..100 {
            let arms = random_spanning_arms(&mut rng, 3, 5);
            let spec = crate::problems::ProblemSpec::bai(arms).unwrap();
            let theta = nalgebra::DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
            let counts: Vec<u64> = (0..5).map(|_| rng.random_range(1..50)).collect();
            let d = glr_stopping(&spec, &theta, &counts, 0.1, &p3).unwrap();
            let closed = bai_closed_form_statistic(&spec, &theta, &counts).unwrap();
            assert!(
                (d.statistic - closed).abs() <= 1e-8 * (1.0 + closed),
                "glr {} vs closed form {}",
                d.statistic,
                closed
            );
        }
    }

    #[test]
    fn glr_statistic_monotone_in_counts() {
        let mut rng = StdRng::seed_from_u64(101);
        let spec = crate::problems::ProblemSpec::bai(counterexample_arms(0.5)).unwrap();
        let p = params();
        for _ in 0..20 {
            let theta = vec2(rng.random_range(0.3..1.2), rng.random_range(-0.3..0.3));
            let counts: Vec<u64> = (0..3).map(|_| rng.random_range(1..30)).collect();
            let d0 = glr_stopping(&spec, &theta, &counts, 0.1, &p).unwrap();
            let mut bumped = counts.clone();
            bumped[rng.random_range(0..3)] += rng.random_range(1..10);
            let d1 = glr_stopping(&spec, &theta, &bumped, 0.1, &p).unwrap();
            assert!(d1.statistic >= d0.statistic - 1e-12);
        }
    }

    #[test]
    fn glr_threshold_kind_runs() {
        let arms = canonical(2);
        let spec =
            crate::problems::ProblemSpec::new(ProblemKind::Threshold, arms, None, Some(1.0), None)
                .unwrap();
        let p = params();
        let d = glr_stopping(&spec, &vec2(2.0, 0.0), &[40, 40], 0.1, &p).unwrap();
        // candidate answer {arm 0}; value = min over flips
        assert_eq!(d.answer, crate::problems::Answer::Set(0b01));
        assert!(d.statistic > 0.0);
    }
}
