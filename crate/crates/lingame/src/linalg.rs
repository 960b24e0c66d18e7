//! Dense small-dimension linear algebra: arm sets, design matrices, weighted
//! (co)norms, regularized least squares and rank-one inverse updates.
//!
//! Inverse quadratic forms go through a symmetric solve (Cholesky, with an
//! SVD fallback for singular matrices), never an explicit inverse. The one
//! exception is [`rank_one_inverse_update`], which maintains an explicit
//! inverse for O(d²) per-round updates inside samplers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Residual threshold factor deciding whether a vector lies in the range of a
/// singular design matrix; outside range, the inverse norm is reported as the
/// `+∞` sentinel (the associated projection value is 0).
const RANGE_RESIDUAL_TOL: f64 = 1e-10;

/// A finite collection of arms in `ℝ^d` spanning the whole space.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSet {
    arms: Vec<DVector<f64>>,
    dim: usize,
    norm_bound: f64,
}

impl ArmSet {
    /// Builds an arm set, checking dimensional consistency and that the arms
    /// span `ℝ^d`. The norm bound `L` is the exact maximum Euclidean norm.
    pub fn new(arms: Vec<DVector<f64>>) -> Result<Self> {
        let Some(first) = arms.first() else {
            return Err(Error::InvalidParameter("arm set is empty".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "arms must have dimension ≥ 1".into(),
            ));
        }
        if let Some(bad) = arms.iter().position(|a| a.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "arm {bad} has dimension {}, expected {dim}",
                arms[bad].len()
            )));
        }
        let stacked = DMatrix::from_columns(&arms);
        let svd = stacked.svd(false, false);
        let smax = svd.singular_values.max();
        let rank = svd
            .singular_values
            .iter()
            .filter(|s| **s > 1e-10 * smax * dim.max(arms.len()) as f64)
            .count();
        if rank < dim {
            return Err(Error::InvalidParameter(format!(
                "arms span a subspace of rank {rank} < d = {dim}"
            )));
        }
        let norm_bound = arms.iter().map(|a| a.norm()).fold(0.0, f64::max);
        Ok(Self {
            arms,
            dim,
            norm_bound,
        })
    }

    /// Convenience constructor from plain vectors.
    pub fn from_vecs(arms: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(arms.into_iter().map(DVector::from_vec).collect())
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `L`, the maximum Euclidean norm over the arms.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn arm(&self, index: usize) -> &DVector<f64> {
        &self.arms[index]
    }

    pub fn arms(&self) -> &[DVector<f64>] {
        &self.arms
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DVector<f64>> {
        self.arms.iter()
    }
}

/// Nonnegative weights over an index set summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("simplex weights are empty".into()));
        }
        if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "simplex weights must be nonnegative".into(),
            ));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "simplex weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self(values))
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![1.0 / len as f64; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for SimplexWeights {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `V_w = Σ_a w^a a aᵀ`, optionally carrying a ridge `η` applied as `ηI`
/// inside inverse quadratic forms.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    matrix: DMatrix<f64>,
    ridge: f64,
}

impl DesignMatrix {
    /// Wraps an existing symmetric PSD matrix, validating both properties.
    pub fn new(matrix: DMatrix<f64>, ridge: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(
                "design matrix must be square".into(),
            ));
        }
        if ridge < 0.0 {
            return Err(Error::InvalidParameter("ridge must be nonnegative".into()));
        }
        for i in 0..matrix.nrows() {
            for j in (i + 1)..matrix.ncols() {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 * (1.0 + matrix[(i, j)].abs()) {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let eigs = matrix.clone().symmetric_eigenvalues();
        let min_eig = eigs.min();
        let trace = matrix.trace();
        if min_eig < -1e-10 * trace.max(1e-300) {
            return Err(Error::InvalidParameter(format!(
                "matrix is not PSD: min eigenvalue {min_eig}"
            )));
        }
        Ok(Self { matrix, ridge })
    }

    /// `design_matrix`: builds `Σ_a w^a a aᵀ`. Weights need not sum to one;
    /// raw counts `N_t` are also valid inputs.
    pub fn from_weights(arms: &ArmSet, weights: &[f64]) -> Result<Self> {
        if weights.len() != arms.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} arms",
                weights.len(),
                arms.len()
            )));
        }
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "design weights must be nonnegative".into(),
            ));
        }
        let d = arms.dim();
        let mut m = DMatrix::<f64>::zeros(d, d);
        for (w, a) in weights.iter().zip(arms.iter()) {
            if *w != 0.0 {
                // m += w * a aᵀ, exactly symmetric entry-wise.
                for i in 0..d {
                    for j in 0..d {
                        m[(i, j)] += w * a[i] * a[j];
                    }
                }
            }
        }
        Ok(Self {
            matrix: m,
            ridge: 0.0,
        })
    }

    pub fn from_counts(arms: &ArmSet, counts: &[u64]) -> Result<Self> {
        let weights: Vec<f64> = counts.iter().map(|c| *c as f64).collect();
        Self::from_weights(arms, &weights)
    }

    pub fn with_ridge(mut self, ridge: f64) -> Self {
        self.ridge = ridge;
        self
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `xᵀ V x`.
    pub fn quad_direct(&self, x: &DVector<f64>) -> f64 {
        assert_eq!(x.len(), self.dim(), "quad_direct: dimension mismatch");
        (x.transpose() * &self.matrix * x)[(0, 0)]
    }

    /// `xᵀ (V + ridge·I)⁺ x` via a symmetric solve.
    ///
    /// Returns `f64::INFINITY` when `ridge = 0` and `x` has a component
    /// outside the range of `V` (the inverse norm is infinite and the
    /// associated halfspace projection value is 0).
    pub fn quad_inverse(&self, x: &DVector<f64>) -> f64 {
        match self.solve_ridge(x) {
            Some(z) => x.dot(&z).max(0.0),
            None => f64::INFINITY,
        }
    }

    /// Solves `(V + ridge·I) z = x`. `None` is the out-of-range sentinel:
    /// `ridge = 0`, `V` singular, and `x` not in its range.
    pub fn solve_ridge(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        assert_eq!(x.len(), self.dim(), "solve_ridge: dimension mismatch");
        let mut r = self.matrix.clone();
        if self.ridge > 0.0 {
            for i in 0..r.nrows() {
                r[(i, i)] += self.ridge;
            }
        }
        let z = solve_spd(&r, x)?;
        if self.ridge == 0.0 {
            let resid = (&self.matrix * &z - x).norm();
            if resid > RANGE_RESIDUAL_TOL * x.norm() * self.matrix.trace() {
                return None;
            }
        }
        Some(z)
    }
}

/// Symmetric positive (semi)definite solve: Cholesky first, SVD-based
/// least-squares fallback for singular inputs. `None` only when even the
/// fallback cannot produce a finite solution.
pub(crate) fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(chol) = m.clone().cholesky() {
        let z = chol.solve(rhs);
        if z.iter().all(|v| v.is_finite()) {
            return Some(z);
        }
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = (1e-13 * smax).max(f64::MIN_POSITIVE);
    svd.solve(rhs, eps)
        .ok()
        .filter(|z| z.iter().all(|v| v.is_finite()))
}

/// A factored symmetric solve reused across several right-hand sides, with
/// the same out-of-range sentinel semantics as [`DesignMatrix::solve_ridge`].
pub(crate) enum SpdFactor {
    Chol(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Svd {
        matrix: DMatrix<f64>,
        svd: nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
        check_range: bool,
        trace: f64,
    },
}

impl SpdFactor {
    pub(crate) fn new(base: &DMatrix<f64>, ridge: f64) -> Self {
        let mut m = base.clone();
        if ridge > 0.0 {
            for i in 0..m.nrows() {
                m[(i, i)] += ridge;
            }
        }
        match m.clone().cholesky() {
            Some(chol) => Self::Chol(chol),
            None => {
                let svd = m.clone().svd(true, true);
                let trace = base.trace();
                Self::Svd {
                    matrix: m,
                    svd,
                    check_range: ridge == 0.0,
                    trace,
                }
            }
        }
    }

    pub(crate) fn for_design(v: &DesignMatrix) -> Self {
        Self::new(v.matrix(), v.ridge())
    }

    /// `None` is the out-of-range sentinel.
    pub(crate) fn solve(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Self::Chol(chol) => {
                let z = chol.solve(x);
                z.iter().all(|v| v.is_finite()).then_some(z)
            }
            Self::Svd {
                matrix,
                svd,
                check_range,
                trace,
            } => {
                let smax = svd.singular_values.max();
                let eps = (1e-13 * smax).max(f64::MIN_POSITIVE);
                let z = svd.solve(x, eps).ok()?;
                if !z.iter().all(|v| v.is_finite()) {
                    return None;
                }
                if *check_range {
                    let resid = (matrix * &z - x).norm();
                    if resid > RANGE_RESIDUAL_TOL * x.norm() * trace {
                        return None;
                    }
                }
                Some(z)
            }
        }
    }
}

/// Regularized least squares estimate
/// `θ̂_t = (V_{N_t} + ηI)⁻¹ Σ_s Y_s a_s` (zero vector at `t = 0`).
pub fn regularized_lse(
    arms: &ArmSet,
    pull_history: &[usize],
    rewards: &[f64],
    eta: f64,
) -> Result<DVector<f64>> {
    if pull_history.len() != rewards.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} pulls vs {} rewards",
            pull_history.len(),
            rewards.len()
        )));
    }
    if eta <= 0.0 {
        return Err(Error::InvalidParameter(
            "regularization eta must be positive".into(),
        ));
    }
    let d = arms.dim();
    if pull_history.is_empty() {
        return Ok(DVector::zeros(d));
    }
    if let Some(&bad) = pull_history.iter().find(|&&k| k >= arms.len()) {
        return Err(Error::DimensionMismatch(format!(
            "arm index {bad} out of range"
        )));
    }
    let mut v = DMatrix::<f64>::identity(d, d) * eta;
    let mut b = DVector::<f64>::zeros(d);
    for (&k, &y) in pull_history.iter().zip(rewards) {
        let a = arms.arm(k);
        for i in 0..d {
            for j in 0..d {
                v[(i, j)] += a[i] * a[j];
            }
        }
        b += a * y;
    }
    Ok(v.cholesky()
        .expect("V + ηI is positive definite for η > 0")
        .solve(&b))
}

/// Sherman–Morrison update: `(V + a aᵀ)⁻¹` from `V⁻¹`.
///
/// The denominator `1 + aᵀ V⁻¹ a` is at least one for PSD `V⁻¹`, so the
/// update never divides by a small number.
pub fn rank_one_inverse_update(vinv: &DMatrix<f64>, a: &DVector<f64>) -> DMatrix<f64> {
    let u = vinv * a;
    let denom = 1.0 + a.dot(&u);
    let mut out = vinv.clone();
    let d = vinv.nrows();
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] -= u[i] * u[j] / denom;
        }
    }
    out
}

/// Lowest-index argmax over floats (strict improvement keeps the scan
/// deterministic under ties).
pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Lowest-index argmin over floats.
pub(crate) fn argmin_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}
