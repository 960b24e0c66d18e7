//! Gaussian linear-bandit environment, the episode runner (stop-check →
//! sample → update), and seeded replication across instances, algorithms
//! and confidence levels.
//!
//! Reproducibility: every episode owns a `ChaCha8` RNG stream seeded from
//! the master seed, and normal variates come from `rand_distr`'s ziggurat
//! `StandardNormal`; both are fixed per release, so a `(algorithm,
//! instance, delta, seed)` tuple determines the run trace byte for byte.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::rank_one_inverse_update;
use crate::problems::{candidate_answer, correct_answer, ProblemSpec};
use crate::samplers::{build_sampler, RoundView, SamplerKind};
use crate::stopping::{glr_stopping, ThresholdParams};

/// Rounds between fresh re-solves of the incrementally maintained
/// estimator state (washes Sherman-Morrison drift).
const RESOLVE_PERIOD: u64 = 1000;

/// Seed stride for per-run seed derivation (odd, so multiplication is a
/// bijection on 64-bit words and derived seeds never collide).
pub const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// One bandit environment: a problem, its true parameter and noise level.
#[derive(Debug, Clone)]
pub struct Instance {
    pub spec: ProblemSpec,
    pub theta: DVector<f64>,
    pub noise_sd: f64,
    pub label: String,
}

impl Instance {
    pub fn new(
        spec: ProblemSpec,
        theta: DVector<f64>,
        noise_sd: f64,
        label: String,
    ) -> Result<Self> {
        if theta.len() != spec.dim() {
            return Err(Error::DimensionMismatch(
                "θ dimension differs from the arms".into(),
            ));
        }
        if noise_sd < 0.0 || !noise_sd.is_finite() {
            return Err(Error::InvalidParameter(
                "noise_sd must be finite and ≥ 0".into(),
            ));
        }
        if let Some(m) = spec.param_bound() {
            if theta.norm() > m {
                return Err(Error::InvalidParameter(format!(
                    "‖θ‖ = {} exceeds the parameter bound M = {m}",
                    theta.norm()
                )));
            }
        }
        correct_answer(&spec, &theta)?;
        Ok(Self {
            spec,
            theta,
            noise_sd,
            label,
        })
    }
}

/// Regularization picked per run: a literal value, or `"theorem"` for the
/// theorem-compliant `η = 2(1 + log A)·A·L² + M²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaMode {
    Value(f64),
    Named(String),
}

impl EtaMode {
    pub fn theorem() -> Self {
        Self::Named("theorem".into())
    }

    pub fn resolve(&self, spec: &ProblemSpec) -> Result<f64> {
        match self {
            Self::Value(v) if *v > 0.0 => Ok(*v),
            Self::Value(v) => Err(Error::Config(format!("eta must be positive, got {v}"))),
            Self::Named(name) if name == "theorem" => {
                let a = spec.arms().len() as f64;
                let l = spec.arms().norm_bound();
                let m = spec.param_bound().ok_or_else(|| {
                    Error::Config("theorem eta needs the parameter bound M".into())
                })?;
                Ok(2.0 * (1.0 + a.ln()) * a * l * l + m * m)
            }
            Self::Named(name) => Err(Error::Config(format!(
                "unknown eta mode '{name}' (expected \"theorem\")"
            ))),
        }
    }
}

/// Per-run knobs shared across a benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub eta: EtaMode,
    pub alpha_explore: f64,
    pub max_steps: u64,
    /// Collect per-round sampler diagnostics (slow; test use).
    #[serde(default)]
    pub trace: bool,
    /// Record wall-clock times in traces. Off by default: timing is the one
    /// field that would break byte-identical reruns.
    #[serde(default)]
    pub timings: bool,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            eta: EtaMode::Value(1.0),
            alpha_explore: 3.0,
            max_steps: 1_000_000,
            trace: false,
            timings: false,
        }
    }
}

/// Full record of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub instance: String,
    pub algorithm: String,
    pub delta: f64,
    pub seed: u64,
    /// Pulls made before stopping.
    pub tau: u64,
    /// Flat encoding of the returned answer (arm index, or subset bitmask).
    pub answer: u64,
    pub correct: bool,
    pub counts: Vec<u64>,
    pub timed_out: bool,
    pub wall_ms: u64,
}

/// One observation `⟨θ, a⟩ + σZ` from the run's dedicated stream.
pub fn sample_reward(instance: &Instance, arm: usize, rng: &mut ChaCha8Rng) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    instance.theta.dot(instance.spec.arms().arm(arm)) + instance.noise_sd * z
}

/// Runs one episode: at each round the stop-check (with `β(t−1, δ)` on the
/// pre-round state) precedes the sampler's pull; the estimate is maintained
/// incrementally by rank-one updates with a periodic fresh re-solve.
pub fn run_episode(
    kind: SamplerKind,
    instance: &Instance,
    delta: f64,
    seed: u64,
    params: &RunParams,
) -> Result<RunTrace> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    if params.max_steps == 0 {
        return Err(Error::Config("max_steps must be ≥ 1".into()));
    }
    let spec = &instance.spec;
    let eta = params.eta.resolve(spec)?;
    let m = spec.param_bound().ok_or_else(|| {
        Error::Config("running an episode needs the parameter bound M (stopping threshold)".into())
    })?;
    let tp = ThresholdParams::new(
        spec.dim(),
        spec.arms().norm_bound(),
        eta,
        m,
        params.alpha_explore,
    )?;
    let truth = correct_answer(spec, &instance.theta)?;
    let mut sampler = build_sampler(kind, spec, &instance.theta, params.trace)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let d = spec.dim();
    let arm_count = spec.arms().len();
    let mut v_count = DMatrix::<f64>::zeros(d, d);
    let mut v_reg_inv = DMatrix::<f64>::identity(d, d) / eta;
    let mut weighted_rewards = DVector::<f64>::zeros(d);
    let mut theta_hat = DVector::<f64>::zeros(d);
    let mut counts = vec![0u64; arm_count];
    let started = std::time::Instant::now();

    let finish =
        |tau: u64, answer: crate::problems::Answer, counts: Vec<u64>, timed_out: bool| RunTrace {
            instance: instance.label.clone(),
            algorithm: kind.name().to_string(),
            delta,
            seed,
            tau,
            answer: answer.as_u64(),
            correct: answer == truth && !timed_out,
            counts,
            timed_out,
            wall_ms: if params.timings {
                started.elapsed().as_millis() as u64
            } else {
                0
            },
        };

    for t in 1..=params.max_steps {
        let decision = glr_stopping(spec, &theta_hat, &counts, delta, &tp)?;
        if decision.stop {
            return Ok(finish(t - 1, decision.answer, counts, false));
        }
        let view = RoundView {
            t,
            theta_hat: &theta_hat,
            counts: &counts,
            v_count: &v_count,
            v_reg_inv: &v_reg_inv,
            delta,
            params: &tp,
        };
        let outcome = sampler.step(&view)?;
        let reward = sample_reward(instance, outcome.arm, &mut rng);
        let arm = spec.arms().arm(outcome.arm);
        v_reg_inv = rank_one_inverse_update(&v_reg_inv, arm);
        for i in 0..d {
            for j in 0..d {
                v_count[(i, j)] += arm[i] * arm[j];
            }
        }
        weighted_rewards += arm * reward;
        counts[outcome.arm] += 1;
        theta_hat = &v_reg_inv * &weighted_rewards;

        if t % RESOLVE_PERIOD == 0 {
            let mut v_reg = v_count.clone();
            for i in 0..d {
                v_reg[(i, i)] += eta;
            }
            let chol = v_reg.cholesky().expect("V_N + ηI is positive definite");
            let fresh_theta = chol.solve(&weighted_rewards);
            debug_assert!(
                (&fresh_theta - &theta_hat).norm() < 1e-6,
                "incremental estimator drifted: {}",
                (&fresh_theta - &theta_hat).norm()
            );
            v_reg_inv = chol.inverse();
            theta_hat = fresh_theta;
        }
    }
    let answer = candidate_answer(spec, &theta_hat);
    Ok(finish(params.max_steps, answer, counts, true))
}

/// The grid one benchmark spans.
#[derive(Debug, Clone)]
pub struct RunMatrix {
    pub instances: Vec<Instance>,
    pub algorithms: Vec<SamplerKind>,
    pub deltas: Vec<f64>,
    pub n_reps: u32,
    pub master_seed: u64,
    pub params: RunParams,
}

/// A run that failed; recorded, never fatal to the rest of the batch.
#[derive(Debug, Clone, Serialize)]
pub struct RunFailure {
    pub instance: String,
    pub algorithm: String,
    pub delta: f64,
    pub rep: u32,
    pub message: String,
}

pub fn derive_seed(master_seed: u64, run_index: u64) -> u64 {
    master_seed ^ run_index.wrapping_mul(SEED_STRIDE)
}

struct Job<'a> {
    instance: &'a Instance,
    algorithm: SamplerKind,
    delta: f64,
    rep: u32,
    seed: u64,
}

fn jobs(matrix: &RunMatrix) -> Vec<Job<'_>> {
    let mut out = Vec::new();
    let mut index = 0u64;
    for instance in &matrix.instances {
        for &algorithm in &matrix.algorithms {
            for &delta in &matrix.deltas {
                for rep in 0..matrix.n_reps {
                    out.push(Job {
                        instance,
                        algorithm,
                        delta,
                        rep,
                        seed: derive_seed(matrix.master_seed, index),
                    });
                    index += 1;
                }
            }
        }
    }
    out
}

fn run_job(job: &Job<'_>, params: &RunParams) -> std::result::Result<RunTrace, RunFailure> {
    run_episode(job.algorithm, job.instance, job.delta, job.seed, params).map_err(|e| RunFailure {
        instance: job.instance.label.clone(),
        algorithm: job.algorithm.name().to_string(),
        delta: job.delta,
        rep: job.rep,
        message: e.to_string(),
    })
}

fn split_outcomes(
    results: Vec<std::result::Result<RunTrace, RunFailure>>,
) -> (Vec<RunTrace>, Vec<RunFailure>) {
    let mut traces = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(t) => traces.push(t),
            Err(f) => failures.push(f),
        }
    }
    (traces, failures)
}

/// Runs every `(instance, algorithm, delta, rep)` episode sequentially.
/// Output order is the enumeration order, so it is independent of any
/// execution schedule.
pub fn replicate_sequential(matrix: &RunMatrix) -> (Vec<RunTrace>, Vec<RunFailure>) {
    let jobs = jobs(matrix);
    split_outcomes(jobs.iter().map(|j| run_job(j, &matrix.params)).collect())
}

/// Replicates the benchmark grid on a worker pool of the given size
/// (`workers ≤ 1` runs sequentially). Episodes are independent and own
/// their RNG streams; results come back in enumeration order either way.
#[cfg(feature = "parallel")]
pub fn replicate(matrix: &RunMatrix, workers: usize) -> (Vec<RunTrace>, Vec<RunFailure>) {
    use rayon::prelude::*;
    if workers <= 1 {
        return replicate_sequential(matrix);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("worker pool construction");
    let jobs = jobs(matrix);
    let results = pool.install(|| {
        jobs.par_iter()
            .map(|j| run_job(j, &matrix.params))
            .collect()
    });
    split_outcomes(results)
}

/// Sequential stand-in when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn replicate(matrix: &RunMatrix, _workers: usize) -> (Vec<RunTrace>, Vec<RunFailure>) {
    replicate_sequential(matrix)
}
