//! Pure-exploration problem definitions: answer sets, correct-answer maps,
//! alternative sets `¬i` as unions of halfspaces, and nature's best-response
//! oracles (closed form for unbounded kinds, a one-dimensional dual
//! maximization for the norm-bounded variant).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{argmax_lowest, ArmSet, DesignMatrix, SpdFactor};

/// Tolerance below which a tied argmax or an arm mean sitting on the
/// threshold level makes the parameter degenerate (no unique answer).
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Bai,
    BoundedBai,
    TransductiveBai,
    Threshold,
    TransductiveThreshold,
}

impl ProblemKind {
    pub fn is_bai(self) -> bool {
        matches!(self, Self::Bai | Self::BoundedBai | Self::TransductiveBai)
    }

    pub fn is_threshold(self) -> bool {
        matches!(self, Self::Threshold | Self::TransductiveThreshold)
    }

    pub fn is_transductive(self) -> bool {
        matches!(self, Self::TransductiveBai | Self::TransductiveThreshold)
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Bai => "bai",
            Self::BoundedBai => "bounded-bai",
            Self::TransductiveBai => "transductive-bai",
            Self::Threshold => "threshold",
            Self::TransductiveThreshold => "transductive-threshold",
        };
        f.write_str(s)
    }
}

/// An identified answer: the best arm (index into the answer vector set) or
/// an above-threshold subset encoded as a bitset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Answer {
    Arm(usize),
    Set(u64),
}

impl Answer {
    /// Flat numeric encoding used in run traces and CSV output.
    pub fn as_u64(self) -> u64 {
        match self {
            Self::Arm(i) => i as u64,
            Self::Set(mask) => mask,
        }
    }
}

impl std::fmt::Display for Answer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_u64())
    }
}

/// A halfspace `{λ : ⟨λ, normal⟩ ≥ offset}`; the alternative set `¬i` is the
/// union of the halfspaces returned by [`alternative_halfspaces`].
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: DVector<f64>,
    pub offset: f64,
}

/// Nature's closest confusing parameter for one answer.
#[derive(Debug, Clone)]
pub struct BestResponse {
    /// `inf ½‖θ−λ‖²_{V_w}` over the alternative.
    pub value: f64,
    /// The minimizing alternative parameter.
    pub lambda: DVector<f64>,
    /// Index of the halfspace achieving the minimum, in the order returned
    /// by [`alternative_halfspaces`] (ties broken by lowest index).
    pub active_constraint: usize,
    /// Dual multiplier of the norm constraint (bounded BAI only).
    pub gamma: Option<f64>,
    /// False when the infimum is not attained (a singular design lets nature
    /// escape along a null direction at zero cost); `lambda` is then `θ`.
    pub attained: bool,
}

/// A pure-exploration problem: what must be identified, over which vectors.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    kind: ProblemKind,
    arms: ArmSet,
    param_bound: Option<f64>,
    threshold_level: Option<f64>,
    targets: Option<Vec<DVector<f64>>>,
}

impl ProblemSpec {
    pub fn new(
        kind: ProblemKind,
        arms: ArmSet,
        param_bound: Option<f64>,
        threshold_level: Option<f64>,
        targets: Option<Vec<DVector<f64>>>,
    ) -> Result<Self> {
        if let Some(m) = param_bound {
            if !m.is_finite() || m <= 0.0 {
                return Err(Error::InvalidParameter(
                    "parameter bound M must be > 0".into(),
                ));
            }
        }
        if kind == ProblemKind::BoundedBai && param_bound.is_none() {
            return Err(Error::InvalidParameter("bounded BAI requires M".into()));
        }
        if kind.is_threshold() {
            match threshold_level {
                Some(i) if i.is_finite() => {}
                _ => {
                    return Err(Error::InvalidParameter(
                        "threshold kinds require a finite level ι".into(),
                    ))
                }
            }
        }
        if kind.is_transductive() {
            let Some(b) = targets.as_ref().filter(|b| !b.is_empty()) else {
                return Err(Error::InvalidParameter(
                    "transductive kinds require a nonempty target set".into(),
                ));
            };
            if let Some(bad) = b.iter().position(|v| v.len() != arms.dim()) {
                return Err(Error::DimensionMismatch(format!(
                    "target {bad} has dimension {}, expected {}",
                    b[bad].len(),
                    arms.dim()
                )));
            }
        }
        let spec = Self {
            kind,
            arms,
            param_bound,
            threshold_level,
            targets,
        };
        if spec.kind.is_bai() && spec.answer_vectors().len() < 2 {
            return Err(Error::InvalidParameter(
                "best-arm identification needs at least two candidates".into(),
            ));
        }
        if spec.kind.is_threshold() && spec.answer_vectors().len() > 64 {
            return Err(Error::InvalidParameter(
                "threshold answers are bitsets; at most 64 candidates supported".into(),
            ));
        }
        Ok(spec)
    }

    pub fn bai(arms: ArmSet) -> Result<Self> {
        Self::new(ProblemKind::Bai, arms, None, None, None)
    }

    pub fn bounded_bai(arms: ArmSet, m: f64) -> Result<Self> {
        Self::new(ProblemKind::BoundedBai, arms, Some(m), None, None)
    }

    pub fn threshold(arms: ArmSet, iota: f64, m: Option<f64>) -> Result<Self> {
        Self::new(ProblemKind::Threshold, arms, m, Some(iota), None)
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn arms(&self) -> &ArmSet {
        &self.arms
    }

    pub fn dim(&self) -> usize {
        self.arms.dim()
    }

    /// `M`, when present.
    pub fn param_bound(&self) -> Option<f64> {
        self.param_bound
    }

    /// `ι` for threshold kinds.
    pub fn threshold_level(&self) -> Option<f64> {
        self.threshold_level
    }

    pub fn targets(&self) -> Option<&[DVector<f64>]> {
        self.targets.as_deref()
    }

    /// The vectors answers are built from: the transductive set for
    /// transductive kinds, the arms otherwise.
    pub fn answer_vectors(&self) -> &[DVector<f64>] {
        if self.kind.is_transductive() {
            self.targets.as_deref().expect("validated at construction")
        } else {
            self.arms.arms()
        }
    }
}

/// The unique correct answer `i*(θ)`, or a degenerate-parameter error when
/// `θ` sits within [`DEGENERACY_TOL`] of a decision boundary.
pub fn correct_answer(spec: &ProblemSpec, theta: &DVector<f64>) -> Result<Answer> {
    check_dim(spec, theta)?;
    let vectors = spec.answer_vectors();
    if spec.kind().is_bai() {
        let values: Vec<f64> = vectors.iter().map(|v| theta.dot(v)).collect();
        let best = argmax_lowest(&values);
        for (j, v) in values.iter().enumerate() {
            if j != best && values[best] - v <= DEGENERACY_TOL {
                return Err(Error::DegenerateParameter(format!(
                    "tied best candidates {best} and {j}"
                )));
            }
        }
        Ok(Answer::Arm(best))
    } else {
        let iota = spec.threshold_level().expect("threshold kind has ι");
        let mut mask = 0u64;
        for (j, v) in vectors.iter().enumerate() {
            let mean = theta.dot(v);
            if (mean - iota).abs() <= DEGENERACY_TOL {
                return Err(Error::DegenerateParameter(format!(
                    "candidate {j} sits on the threshold level"
                )));
            }
            if mean >= iota {
                mask |= 1 << j;
            }
        }
        Ok(Answer::Set(mask))
    }
}

/// Non-erroring variant used where a candidate is needed even at degenerate
/// parameters: lowest-index argmax for BAI, non-strict `≥ ι` for thresholds.
pub(crate) fn candidate_answer(spec: &ProblemSpec, theta: &DVector<f64>) -> Answer {
    let vectors = spec.answer_vectors();
    if spec.kind().is_bai() {
        let values: Vec<f64> = vectors.iter().map(|v| theta.dot(v)).collect();
        Answer::Arm(argmax_lowest(&values))
    } else {
        let iota = spec.threshold_level().expect("threshold kind has ι");
        let mut mask = 0u64;
        for (j, v) in vectors.iter().enumerate() {
            if theta.dot(v) >= iota {
                mask |= 1 << j;
            }
        }
        Answer::Set(mask)
    }
}

pub(crate) fn is_degenerate(spec: &ProblemSpec, theta: &DVector<f64>) -> bool {
    correct_answer(spec, theta).is_err()
}

/// Expresses `¬answer` as a union of halfspaces `{λ : ⟨λ,y⟩ ≥ x}`.
pub fn alternative_halfspaces(spec: &ProblemSpec, answer: &Answer) -> Vec<Halfspace> {
    let vectors = spec.answer_vectors();
    match (spec.kind().is_bai(), answer) {
        (true, Answer::Arm(i)) => vectors
            .iter()
            .enumerate()
            .filter(|(j, _)| j != i)
            .map(|(_, v)| Halfspace {
                normal: v - &vectors[*i],
                offset: 0.0,
            })
            .collect(),
        (false, Answer::Set(mask)) => {
            let iota = spec.threshold_level().expect("threshold kind has ι");
            vectors
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    if mask & (1 << j) != 0 {
                        // claimed above ι: flipping it below means ⟨λ,−v⟩ ≥ −ι
                        Halfspace {
                            normal: -v,
                            offset: -iota,
                        }
                    } else {
                        Halfspace {
                            normal: v.clone(),
                            offset: iota,
                        }
                    }
                })
                .collect()
        }
        _ => panic!("answer shape does not match problem kind"),
    }
}

/// Projection of `θ` onto one halfspace under `½‖θ−λ‖²_{V}`:
/// value `(x−⟨θ,y⟩)₊² / (2‖y‖²_{V⁻¹})`, minimizer `λ = θ + α V⁻¹ y` with
/// `α = (x−⟨θ,y⟩)₊ / ‖y‖²_{V⁻¹}`.
///
/// A singular `V` with `y` outside its range yields the `+∞` sentinel norm:
/// the infimum is 0 but unattained, reported with `attained = false`.
pub fn halfspace_projection(
    theta: &DVector<f64>,
    halfspace: &Halfspace,
    v: &DesignMatrix,
) -> Result<BestResponse> {
    if theta.len() != halfspace.normal.len() || halfspace.normal.len() != v.dim() {
        return Err(Error::DimensionMismatch("halfspace_projection".into()));
    }
    halfspace_projection_factored(theta, halfspace, &SpdFactor::for_design(v))
}

pub(crate) fn halfspace_projection_factored(
    theta: &DVector<f64>,
    halfspace: &Halfspace,
    factor: &SpdFactor,
) -> Result<BestResponse> {
    let y = &halfspace.normal;
    let x = halfspace.offset;
    let feasible_at_theta = |attained: bool| BestResponse {
        value: 0.0,
        lambda: theta.clone(),
        active_constraint: 0,
        gamma: None,
        attained,
    };
    if y.iter().all(|c| *c == 0.0) {
        if x > 0.0 {
            return Err(Error::InfeasibleHalfspace(
                "zero normal with positive offset describes the empty set".into(),
            ));
        }
        return Ok(feasible_at_theta(true));
    }
    let slack = x - theta.dot(y);
    if slack <= 0.0 {
        // θ already satisfies ⟨λ,y⟩ ≥ x
        return Ok(feasible_at_theta(true));
    }
    match factor.solve(y) {
        None => Ok(feasible_at_theta(false)),
        Some(z) => {
            let ny2 = y.dot(&z).max(0.0);
            if ny2 == 0.0 || !ny2.is_finite() {
                return Ok(feasible_at_theta(false));
            }
            let alpha = slack / ny2;
            let lambda = theta + &z * alpha;
            Ok(BestResponse {
                value: slack * slack / (2.0 * ny2),
                lambda,
                active_constraint: 0,
                gamma: None,
                attained: true,
            })
        }
    }
}

/// Nature's best response for unbounded kinds: the minimum of
/// [`halfspace_projection`] over `¬answer`, ties broken by lowest halfspace
/// index.
pub fn best_response(
    spec: &ProblemSpec,
    theta: &DVector<f64>,
    answer: &Answer,
    weights: &[f64],
) -> Result<BestResponse> {
    if spec.kind() == ProblemKind::BoundedBai {
        return Err(Error::Precondition(
            "best_response covers unbounded kinds; bounded BAI uses the dual oracle".into(),
        ));
    }
    let v = DesignMatrix::from_weights(spec.arms(), weights)?;
    min_over_halfspaces(spec, theta, answer, &v)
}

fn min_over_halfspaces(
    spec: &ProblemSpec,
    theta: &DVector<f64>,
    answer: &Answer,
    v: &DesignMatrix,
) -> Result<BestResponse> {
    let factor = SpdFactor::for_design(v);
    let halfspaces = alternative_halfspaces(spec, answer);
    let mut best: Option<BestResponse> = None;
    for (idx, hs) in halfspaces.iter().enumerate() {
        let mut resp = halfspace_projection_factored(theta, hs, &factor)?;
        resp.active_constraint = idx;
        if best.as_ref().is_none_or(|b| resp.value < b.value) {
            best = Some(resp);
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("answer admits no alternative halfspace".into()))
}

/// Bounded-BAI best response for one competing arm direction `y = a* − a`:
///
/// `inf { ½‖θ−λ‖²_{V_w} : ⟨λ, y⟩ ≤ 0, ‖λ‖ ≤ M }`
///
/// computed as the supremum over `γ ≥ 0` of the Lagrange dual
///
/// `D(γ) = ⟨θ,(V+γI)⁻¹Vy⟩₊² / (2‖y‖²_{(V+γI)⁻¹}) + (γ/2)(θᵀV(V+γI)⁻¹θ − M²)`
///
/// with `λ = (V+γI)⁻¹(Vθ − α y)`, `α = ⟨θ,(V+γI)⁻¹Vy⟩₊ / ‖y‖²_{(V+γI)⁻¹}`.
/// `D` is concave on `[0,∞)`; the maximizer is found by doubling expansion
/// followed by golden-section search.
pub fn bounded_best_response(
    theta: &DVector<f64>,
    y: &DVector<f64>,
    weights: &[f64],
    m: f64,
    arms: &ArmSet,
) -> Result<BestResponse> {
    if theta.norm() > m * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "‖θ‖ = {} exceeds the parameter bound M = {m}",
            theta.norm()
        )));
    }
    let v = DesignMatrix::from_weights(arms, weights)?;
    Ok(bounded_halfspace_dual(theta, y, &v, m))
}

/// Spectral workspace for the bounded dual: with `V = QΛQᵀ` every dual
/// evaluation reduces to O(d) flops over the eigenbasis coordinates, so the
/// one-dimensional γ search costs one eigendecomposition total.
pub(crate) struct BoundedDual {
    eigvecs: nalgebra::DMatrix<f64>,
    eigvals: DVector<f64>,
    theta: DVector<f64>,
    /// `Qᵀθ`.
    theta_t: DVector<f64>,
    m: f64,
    /// Eigenvalues at or below this are treated as exact zeros.
    zero_tol: f64,
}

impl BoundedDual {
    pub(crate) fn new(v: &DesignMatrix, theta: &DVector<f64>, m: f64) -> Self {
        let eig = nalgebra::SymmetricEigen::new(v.matrix().clone());
        let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let eigvals = eig.eigenvalues.map(|l| l.max(0.0));
        let theta_t = eig.eigenvectors.transpose() * theta;
        Self {
            eigvecs: eig.eigenvectors,
            eigvals,
            theta: theta.clone(),
            theta_t,
            m,
            zero_tol: 1e-12 * lmax.max(f64::MIN_POSITIVE),
        }
    }

    /// `D(γ) = ⟨θ,(V+γI)⁻¹Vy⟩₊²/(2‖y‖²_{(V+γI)⁻¹}) + (γ/2)(θᵀV(V+γI)⁻¹θ − M²)`
    /// evaluated over the eigenbasis; `y_t = Qᵀy`.
    fn value(&self, y_t: &DVector<f64>, gamma: f64) -> f64 {
        let mut num = 0.0;
        let mut ny2 = 0.0;
        let mut shrunk = 0.0;
        for k in 0..self.eigvals.len() {
            let l = self.eigvals[k];
            let denom = l + gamma;
            if denom <= self.zero_tol {
                // exact null direction at γ = 0: infinite inverse norm
                if y_t[k].abs() > 0.0 {
                    ny2 = f64::INFINITY;
                }
                continue;
            }
            num += self.theta_t[k] * y_t[k] * l / denom;
            ny2 += y_t[k] * y_t[k] / denom;
            shrunk += self.theta_t[k] * self.theta_t[k] * l / denom;
        }
        let ratio = if ny2 > 0.0 && ny2.is_finite() {
            num.max(0.0).powi(2) / (2.0 * ny2)
        } else {
            0.0
        };
        ratio + 0.5 * gamma * (shrunk - self.m * self.m)
    }

    fn lambda(&self, y_t: &DVector<f64>, gamma: f64) -> (DVector<f64>, bool) {
        let d = self.eigvals.len();
        let mut num = 0.0;
        let mut ny2 = 0.0;
        let mut out_of_range = false;
        for k in 0..d {
            let l = self.eigvals[k];
            let denom = l + gamma;
            if denom <= self.zero_tol {
                if y_t[k].powi(2) > 1e-20 * y_t.norm_squared() {
                    out_of_range = true;
                }
                continue;
            }
            num += self.theta_t[k] * y_t[k] * l / denom;
            ny2 += y_t[k] * y_t[k] / denom;
        }
        if out_of_range || ny2 <= 0.0 || !ny2.is_finite() {
            return (self.theta.clone(), false);
        }
        let alpha = num.max(0.0) / ny2;
        // λ = (V+γI)⁻¹(Vθ − αy) in eigen coordinates
        let mut coords = DVector::zeros(d);
        for k in 0..d {
            let denom = self.eigvals[k] + gamma;
            if denom > self.zero_tol {
                coords[k] = (self.eigvals[k] * self.theta_t[k] - alpha * y_t[k]) / denom;
            }
        }
        (&self.eigvecs * coords, true)
    }

    /// `inf {½‖θ−λ‖²_V : ⟨λ,y⟩ ≤ 0, ‖λ‖ ≤ M}` via `sup_γ D(γ)`.
    ///
    /// Fast path: when the minimizer over the halfspace alone is attained
    /// and already inside the ball it solves the intersected problem with
    /// γ* = 0. Otherwise `D` is concave on `[0,∞)` and the maximizer is
    /// bracketed by doubling from γ = 1 (until the objective decreases
    /// across three consecutive probes), then located by golden-section
    /// search to absolute tolerance 1e-10, at most 200 iterations.
    pub(crate) fn solve(&self, y: &DVector<f64>) -> BestResponse {
        let y_t = self.eigvecs.transpose() * y;
        let slack = self.theta.dot(y);
        if slack <= 0.0 {
            return BestResponse {
                value: 0.0,
                lambda: self.theta.clone(),
                active_constraint: 0,
                gamma: Some(0.0),
                attained: true,
            };
        }
        let (plain_lambda, attained) = self.lambda(&y_t, 0.0);
        if attained && plain_lambda.norm() <= self.m {
            return BestResponse {
                value: self.value(&y_t, 0.0).max(0.0),
                lambda: plain_lambda,
                active_constraint: 0,
                gamma: Some(0.0),
                attained: true,
            };
        }
        let f = |g: f64| self.value(&y_t, g);
        let mut probes = vec![(0.0, f(0.0)), (1.0, f(1.0))];
        let mut hi = 1.0;
        loop {
            let n = probes.len();
            if n >= 3 && probes[n - 1].1 < probes[n - 2].1 && probes[n - 2].1 < probes[n - 3].1 {
                break;
            }
            if hi > 1e14 {
                break;
            }
            hi *= 2.0;
            probes.push((hi, f(hi)));
        }
        let inv_phi = 0.618_033_988_749_894_9_f64;
        let (mut lo, mut up) = (0.0_f64, hi);
        let mut x1 = up - inv_phi * (up - lo);
        let mut x2 = lo + inv_phi * (up - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..200 {
            if up - lo <= 1e-10 {
                break;
            }
            if f1 >= f2 {
                up = x2;
                x2 = x1;
                f2 = f1;
                x1 = up - inv_phi * (up - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (up - lo);
                f2 = f(x2);
            }
        }
        let mut gamma = 0.5 * (lo + up);
        let mut value = f(gamma);
        // the endpoint γ = 0 competes with the interior candidate
        let at_zero = f(0.0);
        if at_zero >= value {
            gamma = 0.0;
            value = at_zero;
        }
        let (lambda, attained) = self.lambda(&y_t, gamma);
        let lambda = clip_to_ball(lambda, self.m);
        BestResponse {
            value: value.max(0.0),
            lambda,
            active_constraint: 0,
            gamma: Some(gamma),
            attained,
        }
    }
}

pub(crate) fn bounded_halfspace_dual(
    theta: &DVector<f64>,
    y: &DVector<f64>,
    v: &DesignMatrix,
    m: f64,
) -> BestResponse {
    BoundedDual::new(v, theta, m).solve(y)
}

fn clip_to_ball(lambda: DVector<f64>, m: f64) -> DVector<f64> {
    let n = lambda.norm();
    if n > m * (1.0 + 1e-6) {
        lambda * (m / n)
    } else {
        lambda
    }
}

/// Best response dispatch used by samplers and the stopping rule: bounded
/// kinds go through the dual, everything else through the closed form.
///
/// Unlike [`bounded_best_response`], no `‖θ‖ ≤ M` precondition is applied:
/// the dual is exact for any `θ`, and running estimates may transiently
/// leave the ball.
pub(crate) fn nature_best_response(
    spec: &ProblemSpec,
    theta: &DVector<f64>,
    answer: &Answer,
    weights: &[f64],
) -> Result<BestResponse> {
    if spec.kind() != ProblemKind::BoundedBai {
        return best_response(spec, theta, answer, weights);
    }
    let m = spec.param_bound().expect("bounded BAI carries M");
    let v = DesignMatrix::from_weights(spec.arms(), weights)?;
    let solver = BoundedDual::new(&v, theta, m);
    let Answer::Arm(i) = answer else {
        return Err(Error::InvalidParameter(
            "bounded BAI expects an arm answer".into(),
        ));
    };
    let a_star = spec.arms().arm(*i);
    let mut best: Option<BestResponse> = None;
    let mut idx = 0;
    for (j, a) in spec.arms().iter().enumerate() {
        if j == *i {
            continue;
        }
        let y = a_star - a;
        let mut resp = solver.solve(&y);
        resp.active_constraint = idx;
        if best.as_ref().is_none_or(|b| resp.value < b.value) {
            best = Some(resp);
        }
        idx += 1;
    }
    best.ok_or_else(|| Error::InvalidParameter("no competing arm".into()))
}

/// `Δmin`: the smallest positive gap `⟨θ, a* − a⟩` to the best candidate
/// (BAI kinds).
pub fn min_gap(spec: &ProblemSpec, theta: &DVector<f64>) -> Result<f64> {
    if !spec.kind().is_bai() {
        return Err(Error::Precondition(
            "min_gap is defined for BAI kinds".into(),
        ));
    }
    let Answer::Arm(best) = correct_answer(spec, theta)? else {
        unreachable!()
    };
    let vectors = spec.answer_vectors();
    let top = theta.dot(&vectors[best]);
    Ok(vectors
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != best)
        .map(|(_, v)| top - theta.dot(v))
        .fold(f64::INFINITY, f64::min))
}

fn check_dim(spec: &ProblemSpec, theta: &DVector<f64>) -> Result<()> {
    if theta.len() != spec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "θ has dimension {}, problem has {}",
            theta.len(),
            spec.dim()
        )));
    }
    Ok(())
}
