//! Benchmark CLI: design solving, experiment grids, summaries and instance
//! generation. Exit codes: 0 success, 2 validation error, 1 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lingame::bench::{
    load_instance, make_counterexample, make_sphere_instance, read_traces_csv, run_bench,
    save_instance, summarize_traces, write_traces_csv, BenchConfig, GroupSummary, MPolicy,
};
use lingame::design::complexity_report;
use lingame::simulator::EtaMode;
use lingame::{Error, Result};

#[derive(Parser)]
#[command(
    name = "lingame",
    version,
    about = "Pure exploration for finite-arm linear bandits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute optimal designs and the complexity report of a BAI instance.
    SolveDesign {
        /// Instance JSON file.
        instance: PathBuf,
        /// Solver iterations per design.
        #[arg(long, default_value_t = 20_000)]
        iters: usize,
        /// Confidence level for the tracked lower bounds T_w.
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        /// Report JSON output path.
        #[arg(long, default_value = "design-report.json")]
        out: PathBuf,
    },
    /// Run a benchmark configuration; writes a results CSV and a summary JSON.
    Bench {
        /// Config JSON file.
        config: PathBuf,
        #[command(flatten)]
        overrides: BenchOverrides,
        /// Worker threads for the replication pool.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Output path prefix ({prefix}.csv and {prefix}.summary.json).
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Recompute summary statistics from a results CSV.
    Summarize {
        /// Results CSV produced by `bench`.
        results: PathBuf,
        /// Summary JSON output path.
        #[arg(long, default_value = "summary.json")]
        out: PathBuf,
    },
    /// Generate an instance file.
    #[command(subcommand)]
    MakeInstance(MakeInstance),
}

#[derive(Args)]
struct BenchOverrides {
    /// Replace the config's confidence levels.
    #[arg(long = "delta")]
    deltas: Vec<f64>,
    /// Replace the config's replication count.
    #[arg(long)]
    reps: Option<u32>,
    /// Replace the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Regularization: a positive number, or "theorem".
    #[arg(long)]
    eta: Option<String>,
    /// Exploration-rate exponent (> 2).
    #[arg(long)]
    alpha_explore: Option<f64>,
    /// Per-episode step budget.
    #[arg(long)]
    max_steps: Option<u64>,
    /// Record wall-clock times (breaks byte-identical reruns).
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum MakeInstance {
    /// Canonical basis plus a disturbing arm at angle alpha; θ = e1.
    Counterexample {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        /// Fixed parameter bound M (default: 2·max(1, ‖θ‖)).
        #[arg(long)]
        m: Option<f64>,
        #[arg(long, default_value = "instance.json")]
        out: PathBuf,
    },
    /// Random unit-sphere arms; θ nudged from the closest pair's winner.
    Sphere {
        #[arg(long, default_value_t = 6)]
        d: usize,
        #[arg(long, default_value_t = 20)]
        arms: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fixed parameter bound M (default: 2·max(1, ‖θ‖)).
        #[arg(long)]
        m: Option<f64>,
        #[arg(long, default_value = "instance.json")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_)
                | Error::InvalidParameter(_)
                | Error::Precondition(_)
                | Error::DimensionMismatch(_)
                | Error::DegenerateParameter(_)
                | Error::InfeasibleHalfspace(_) => 2,
                _ => 1,
            })
        }
    }
}

/// Reading user input: missing or unreadable files are validation errors.
fn as_config_error(path: &Path, e: Error) -> Error {
    match e {
        Error::Io(io) => Error::Config(format!("{}: {io}", path.display())),
        other => other,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SolveDesign {
            instance,
            iters,
            delta,
            out,
        } => {
            let inst = load_instance(&instance).map_err(|e| as_config_error(&instance, e))?;
            let report = complexity_report(&inst.spec, &inst.theta, delta, iters)?;
            let json = serde_json::to_string_pretty(&report)?;
            print_design_table(&inst.label, &report);
            std::fs::write(&out, json)?;
            eprintln!("report written to {}", out.display());
            Ok(())
        }
        Command::Bench {
            config,
            overrides,
            workers,
            out,
        } => {
            let cfg = BenchConfig::load(&config).map_err(|e| as_config_error(&config, e))?;
            let cfg = apply_overrides(cfg, &overrides);
            let base = config.parent().unwrap_or(Path::new("."));
            let matrix = cfg.to_matrix(base)?;
            let outcome = run_bench(&matrix, workers);
            let csv_path = out.with_extension("csv");
            let summary_path = out.with_extension("summary.json");
            write_traces_csv(&csv_path, &outcome.traces)?;
            std::fs::write(
                &summary_path,
                serde_json::to_string_pretty(&outcome.summary)?,
            )?;
            print_summary_table(&outcome.summary);
            eprintln!(
                "{} traces -> {}, summary -> {}",
                outcome.traces.len(),
                csv_path.display(),
                summary_path.display()
            );
            if !outcome.failures.is_empty() {
                for f in &outcome.failures {
                    eprintln!(
                        "failed: {} / {} / delta={} rep={}: {}",
                        f.instance, f.algorithm, f.delta, f.rep, f.message
                    );
                }
                return Err(Error::InternalConsistency(format!(
                    "{} episode(s) failed",
                    outcome.failures.len()
                )));
            }
            Ok(())
        }
        Command::Summarize { results, out } => {
            let traces = read_traces_csv(&results).map_err(|e| as_config_error(&results, e))?;
            let summary = summarize_traces(&traces);
            std::fs::write(&out, serde_json::to_string_pretty(&summary)?)?;
            print_summary_table(&summary);
            Ok(())
        }
        Command::MakeInstance(which) => {
            let (instance, out) = match which {
                MakeInstance::Counterexample { d, alpha, m, out } => {
                    let policy = m.map_or(MPolicy::TwoX, MPolicy::Fixed);
                    (make_counterexample(d, alpha, policy)?, out)
                }
                MakeInstance::Sphere {
                    d,
                    arms,
                    seed,
                    m,
                    out,
                } => {
                    if arms <= d {
                        eprintln!(
                            "warning: {arms} arms in dimension {d}; n_arms > d is recommended"
                        );
                    }
                    let policy = m.map_or(MPolicy::TwoX, MPolicy::Fixed);
                    let (instance, resamples) = make_sphere_instance(d, arms, seed, policy)?;
                    if resamples > 0 {
                        eprintln!("note: resampled {resamples} degenerate draw(s)");
                    }
                    (instance, out)
                }
            };
            save_instance(&out, &instance)?;
            eprintln!("instance '{}' written to {}", instance.label, out.display());
            Ok(())
        }
    }
}

fn apply_overrides(mut cfg: BenchConfig, o: &BenchOverrides) -> BenchConfig {
    if !o.deltas.is_empty() {
        cfg.deltas = o.deltas.clone();
    }
    if let Some(reps) = o.reps {
        cfg.n_reps = reps;
    }
    if let Some(seed) = o.seed {
        cfg.master_seed = seed;
    }
    if let Some(eta) = &o.eta {
        cfg.eta = match eta.parse::<f64>() {
            Ok(v) => EtaMode::Value(v),
            Err(_) => EtaMode::Named(eta.clone()),
        };
    }
    if let Some(alpha) = o.alpha_explore {
        cfg.alpha_explore = alpha;
    }
    if let Some(steps) = o.max_steps {
        cfg.max_steps = steps;
    }
    if o.timings {
        cfg.timings = true;
    }
    cfg
}

fn print_design_table(label: &str, report: &lingame::design::ComplexityReport) {
    println!("instance: {label}");
    println!("delta_min   = {:.7}", report.delta_min);
    println!("T*          = {:.6}", report.t_star);
    println!(
        "G value     = {:.6}   (8G/Δ²  = {:.4})",
        report.g_value, report.chain.g_bound
    );
    println!(
        "XY value    = {:.6}   (2XY/Δ² = {:.4})",
        report.xy_value, report.chain.xy_bound
    );
    println!("8d/Δ²       = {:.4}", report.chain.g_identity);
    let fmt = |w: &[f64]| {
        w.iter()
            .map(|v| format!("{v:.6}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!(
        "w*_AB*      = [{}]   T_w = {:.2}",
        fmt(&report.weights.ab_star),
        report.lower_bounds.ab_star
    );
    println!(
        "w*_XY       = [{}]   T_w = {:.2}",
        fmt(&report.weights.xy),
        report.lower_bounds.xy
    );
    println!(
        "w*_G        = [{}]   T_w = {:.2}",
        fmt(&report.weights.g),
        report.lower_bounds.g
    );
}

fn print_summary_table(summary: &[GroupSummary]) {
    println!(
        "{:<28} {:<12} {:>8} {:>6} {:>10} {:>10} {:>10} {:>8} {:>8}",
        "instance", "algorithm", "delta", "runs", "mean_tau", "q10", "q90", "errors", "timeouts"
    );
    for s in summary {
        println!(
            "{:<28} {:<12} {:>8} {:>6} {:>10.1} {:>10.1} {:>10.1} {:>8.4} {:>8}",
            s.instance,
            s.algorithm,
            s.delta,
            s.runs,
            s.mean_tau,
            s.q10_tau,
            s.q90_tau,
            s.error_rate,
            s.timeouts
        );
    }
}
