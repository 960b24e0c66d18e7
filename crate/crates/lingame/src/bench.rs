//! Benchmark plumbing: instance generators for the experimental grids,
//! JSON config and instance files, the results CSV and the summary
//! statistics.
//!
//! File formats (all JSON except the results CSV):
//!
//! * instance: `{label, kind, arms: [[f64]], theta: [f64], noise_sd, m?,
//!   iota?, transductive?: [[f64]]}`
//! * bench config: `{instances: [inline instance | {"file": path}],
//!   algorithms: [names], deltas, n_reps, master_seed, max_steps?, eta?,
//!   alpha_explore?, timings?}`
//! * results CSV columns:
//!   `instance,algorithm,delta,seed,tau,answer,correct,timed_out,wall_ms,counts`
//!   with counts semicolon-joined.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ArmSet;
use crate::problems::{correct_answer, Answer, ProblemKind, ProblemSpec};
use crate::samplers::SamplerKind;
use crate::simulator::{replicate, EtaMode, Instance, RunFailure, RunMatrix, RunParams, RunTrace};

/// How the parameter norm bound `M` is chosen when building instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[derive(Default)]
pub enum MPolicy {
    /// `M = 2·max(1, ‖θ‖)` (default; the experimental M is otherwise
    /// unspecified).
    #[default]
    TwoX,
    Fixed(f64),
}

impl MPolicy {
    pub fn bound(self, theta: &DVector<f64>) -> f64 {
        match self {
            Self::TwoX => 2.0 * theta.norm().max(1.0),
            Self::Fixed(m) => m,
        }
    }
}

/// The hard instance: canonical basis arms `e₁..e_d` plus the disturbing
/// arm `(cos α, sin α, 0, …)`, true parameter `θ = e₁`.
pub fn make_counterexample(d: usize, alpha: f64, m_policy: MPolicy) -> Result<Instance> {
    if d < 2 {
        return Err(Error::InvalidParameter("counterexample needs d ≥ 2".into()));
    }
    if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParameter("angle must lie in (0, π/2)".into()));
    }
    let mut arms: Vec<DVector<f64>> = (0..d)
        .map(|i| DVector::from_fn(d, |j, _| f64::from(j == i)))
        .collect();
    let mut disturbing = DVector::zeros(d);
    disturbing[0] = alpha.cos();
    disturbing[1] = alpha.sin();
    arms.push(disturbing);
    let theta = DVector::from_fn(d, |j, _| f64::from(j == 0));
    let m = m_policy.bound(&theta);
    let spec = ProblemSpec::bounded_bai(ArmSet::new(arms)?, m)?;
    Instance::new(
        spec,
        theta,
        1.0,
        format!("counterexample-d{d}-alpha{alpha:.4}"),
    )
}

/// Random unit-sphere instance: `n_arms` i.i.d. uniform directions, the
/// closest pair `(a, a')` by Euclidean distance, `θ = a + 0.01(a' − a)` so
/// that `a` is the best arm. Returns the instance and how many times the
/// construction had to resample a degenerate draw.
pub fn make_sphere_instance(
    d: usize,
    n_arms: usize,
    seed: u64,
    m_policy: MPolicy,
) -> Result<(Instance, u32)> {
    if d < 2 || n_arms < 2 {
        return Err(Error::InvalidParameter(
            "sphere instance needs d ≥ 2 and ≥ 2 arms".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut resamples = 0u32;
    loop {
        let arms: Vec<DVector<f64>> = (0..n_arms)
            .map(|_| {
                let v = DVector::from_fn(d, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
                let n = v.norm();
                v / n
            })
            .collect();
        let attempt = (|| -> Result<Instance> {
            let (mut bi, mut bj, mut best) = (0usize, 1usize, f64::INFINITY);
            for i in 0..n_arms {
                for j in (i + 1)..n_arms {
                    let dist = (&arms[i] - &arms[j]).norm();
                    if dist < best {
                        (bi, bj, best) = (i, j, dist);
                    }
                }
            }
            if best < 1e-9 {
                return Err(Error::DegenerateParameter("coincident arms".into()));
            }
            let theta = &arms[bi] + (&arms[bj] - &arms[bi]) * 0.01;
            let m = m_policy.bound(&theta);
            let spec = ProblemSpec::bounded_bai(ArmSet::new(arms.clone())?, m)?;
            match correct_answer(&spec, &theta)? {
                Answer::Arm(k) if k == bi => {}
                _ => {
                    return Err(Error::DegenerateParameter(
                        "closest-pair construction did not isolate a best arm".into(),
                    ))
                }
            }
            Instance::new(
                spec,
                theta,
                1.0,
                format!("sphere-d{d}-a{n_arms}-seed{seed}"),
            )
        })();
        match attempt {
            Ok(instance) => return Ok((instance, resamples)),
            Err(_) if resamples < 100 => resamples += 1,
            Err(e) => return Err(e),
        }
    }
}

/// Wire form of an [`Instance`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub label: String,
    pub kind: ProblemKind,
    pub arms: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    #[serde(default = "default_noise")]
    pub noise_sd: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iota: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transductive: Option<Vec<Vec<f64>>>,
}

fn default_noise() -> f64 {
    1.0
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<Instance> {
        let arms = ArmSet::from_vecs(self.arms.clone())?;
        let targets = self
            .transductive
            .as_ref()
            .map(|t| t.iter().map(|v| DVector::from_vec(v.clone())).collect());
        let spec = ProblemSpec::new(self.kind, arms, self.m, self.iota, targets)?;
        Instance::new(
            spec,
            DVector::from_vec(self.theta.clone()),
            self.noise_sd,
            self.label.clone(),
        )
    }

    pub fn from_instance(instance: &Instance) -> Self {
        let spec = &instance.spec;
        Self {
            label: instance.label.clone(),
            kind: spec.kind(),
            arms: spec
                .arms()
                .iter()
                .map(|a| a.iter().copied().collect())
                .collect(),
            theta: instance.theta.iter().copied().collect(),
            noise_sd: instance.noise_sd,
            m: spec.param_bound(),
            iota: spec.threshold_level(),
            transductive: spec
                .targets()
                .map(|t| t.iter().map(|v| v.iter().copied().collect()).collect()),
        }
    }
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    let file: InstanceFile = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    file.to_instance()
}

pub fn save_instance(path: &Path, instance: &Instance) -> Result<()> {
    let file = InstanceFile::from_instance(instance);
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

/// One entry of a config's instance list: inline, or a file reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceRef {
    File { file: String },
    Inline(InstanceFile),
}

/// A benchmark configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub instances: Vec<InstanceRef>,
    pub algorithms: Vec<String>,
    pub deltas: Vec<f64>,
    pub n_reps: u32,
    pub master_seed: u64,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    #[serde(default = "default_eta")]
    pub eta: EtaMode,
    #[serde(default = "default_alpha")]
    pub alpha_explore: f64,
    #[serde(default)]
    pub timings: bool,
}

fn default_max_steps() -> u64 {
    1_000_000
}

fn default_eta() -> EtaMode {
    EtaMode::Value(1.0)
}

fn default_alpha() -> f64 {
    3.0
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Resolves instance references (relative to `base_dir`) and validates
    /// the whole grid.
    pub fn to_matrix(&self, base_dir: &Path) -> Result<RunMatrix> {
        if self.n_reps == 0 {
            return Err(Error::Config("n_reps must be ≥ 1".into()));
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
            return Err(Error::Config(
                "deltas must be a nonempty subset of (0,1)".into(),
            ));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("algorithms must be nonempty".into()));
        }
        let algorithms: Vec<SamplerKind> = self
            .algorithms
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?;
        let mut instances = Vec::with_capacity(self.instances.len());
        for entry in &self.instances {
            instances.push(match entry {
                InstanceRef::File { file } => load_instance(&base_dir.join(file))?,
                InstanceRef::Inline(inline) => inline.to_instance()?,
            });
        }
        if instances.is_empty() {
            return Err(Error::Config("instances must be nonempty".into()));
        }
        let params = RunParams {
            eta: self.eta.clone(),
            alpha_explore: self.alpha_explore,
            max_steps: self.max_steps,
            trace: false,
            timings: self.timings,
        };
        // fail early on grid-level incompatibilities (e.g. lingape on a
        // threshold instance), not in the middle of a batch
        for instance in &instances {
            params.eta.resolve(&instance.spec)?;
            if instance.spec.param_bound().is_none() {
                return Err(Error::Config(format!(
                    "instance '{}' has no parameter bound M",
                    instance.label
                )));
            }
            for &kind in &algorithms {
                crate::samplers::build_sampler(kind, &instance.spec, &instance.theta, false)
                    .map(|_| ())
                    .map_err(|e| Error::Config(format!("{kind} on '{}': {e}", instance.label)))?;
            }
        }
        Ok(RunMatrix {
            instances,
            algorithms,
            deltas: self.deltas.clone(),
            n_reps: self.n_reps,
            master_seed: self.master_seed,
            params,
        })
    }
}

pub const CSV_HEADER: [&str; 10] = [
    "instance",
    "algorithm",
    "delta",
    "seed",
    "tau",
    "answer",
    "correct",
    "timed_out",
    "wall_ms",
    "counts",
];

pub fn traces_to_csv(traces: &[RunTrace]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER)?;
    for t in traces {
        let counts = t
            .counts
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(";");
        writer.write_record([
            t.instance.as_str(),
            t.algorithm.as_str(),
            &t.delta.to_string(),
            &t.seed.to_string(),
            &t.tau.to_string(),
            &t.answer.to_string(),
            &t.correct.to_string(),
            &t.timed_out.to_string(),
            &t.wall_ms.to_string(),
            &counts,
        ])?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}

pub fn write_traces_csv(path: &Path, traces: &[RunTrace]) -> Result<()> {
    Ok(std::fs::write(path, traces_to_csv(traces)?)?)
}

pub fn read_traces_csv(path: &Path) -> Result<Vec<RunTrace>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::Config(format!(
            "unexpected CSV schema: {:?} (expected {:?})",
            headers.iter().collect::<Vec<_>>(),
            CSV_HEADER
        )));
    }
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or_default();
        let parse_err = |what: &str| Error::Config(format!("CSV row {}: bad {what}", line + 2));
        out.push(RunTrace {
            instance: field(0).to_string(),
            algorithm: field(1).to_string(),
            delta: field(2).parse().map_err(|_| parse_err("delta"))?,
            seed: field(3).parse().map_err(|_| parse_err("seed"))?,
            tau: field(4).parse().map_err(|_| parse_err("tau"))?,
            answer: field(5).parse().map_err(|_| parse_err("answer"))?,
            correct: field(6).parse().map_err(|_| parse_err("correct"))?,
            timed_out: field(7).parse().map_err(|_| parse_err("timed_out"))?,
            wall_ms: field(8).parse().map_err(|_| parse_err("wall_ms"))?,
            counts: if field(9).is_empty() {
                Vec::new()
            } else {
                field(9)
                    .split(';')
                    .map(|c| c.parse().map_err(|_| parse_err("counts")))
                    .collect::<Result<_>>()?
            },
        });
    }
    Ok(out)
}

/// Aggregate statistics for one `(instance, algorithm, delta)` cell.
///
/// `error_rate` counts wrong answers among runs that actually stopped;
/// timeouts are reported separately and never fold into `tau` statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub instance: String,
    pub algorithm: String,
    pub delta: f64,
    pub runs: usize,
    pub stopped: usize,
    pub timeouts: usize,
    pub error_rate: f64,
    pub mean_tau: f64,
    pub median_tau: f64,
    pub q10_tau: f64,
    pub q90_tau: f64,
}

/// Linear-interpolation quantile of a sorted sample.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * q;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

pub fn summarize_traces(traces: &[RunTrace]) -> Vec<GroupSummary> {
    let mut groups: BTreeMap<(String, String, String), Vec<&RunTrace>> = BTreeMap::new();
    for t in traces {
        groups
            .entry((t.instance.clone(), t.algorithm.clone(), t.delta.to_string()))
            .or_default()
            .push(t);
    }
    groups
        .into_values()
        .map(|group| {
            let stopped: Vec<&&RunTrace> = group.iter().filter(|t| !t.timed_out).collect();
            let mut taus: Vec<f64> = stopped.iter().map(|t| t.tau as f64).collect();
            taus.sort_by(f64::total_cmp);
            let errors = stopped.iter().filter(|t| !t.correct).count();
            let mean = if taus.is_empty() {
                f64::NAN
            } else {
                taus.iter().sum::<f64>() / taus.len() as f64
            };
            GroupSummary {
                instance: group[0].instance.clone(),
                algorithm: group[0].algorithm.clone(),
                delta: group[0].delta,
                runs: group.len(),
                stopped: stopped.len(),
                timeouts: group.len() - stopped.len(),
                error_rate: if stopped.is_empty() {
                    0.0
                } else {
                    errors as f64 / stopped.len() as f64
                },
                mean_tau: mean,
                median_tau: quantile(&taus, 0.5),
                q10_tau: quantile(&taus, 0.1),
                q90_tau: quantile(&taus, 0.9),
            }
        })
        .collect()
}

/// Outcome of one benchmark run.
pub struct BenchOutcome {
    pub traces: Vec<RunTrace>,
    pub failures: Vec<RunFailure>,
    pub summary: Vec<GroupSummary>,
}

/// Executes a validated config on `workers` threads.
pub fn run_bench(matrix: &RunMatrix, workers: usize) -> BenchOutcome {
    let (traces, failures) = replicate(matrix, workers);
    let summary = summarize_traces(&traces);
    BenchOutcome {
        traces,
        failures,
        summary,
    }
}
