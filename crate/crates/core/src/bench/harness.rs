//! Repeated seeded runs, summary statistics and output files.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::document::{DesignDocument, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::ga::{ga_run, GaConfig};
use crate::optimizer::{bigsmo_run, gsmo_run, penalized_objective, Method, OptimizerConfig, RunRecord};
use crate::problem::StructuralProblem;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FRAMEOPT_THREADS";

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(None),
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub method: Method,
    pub repeats: usize,
    pub base_seed: u64,
    pub optimizer: OptimizerConfig,
    pub ga: GaConfig,
    pub threads: Option<usize>,
}

/// One seeded run: completed or aborted with a diagnostic.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub seed: u64,
    pub result: std::result::Result<RunRecord, String>,
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub problem: String,
    pub config: BenchmarkConfig,
    pub runs: Vec<RunOutcome>,
    pub wall_time_s: f64,
}

impl BenchmarkResult {
    pub fn any_aborted(&self) -> bool {
        self.runs.iter().any(|r| r.result.is_err())
    }

    pub fn completed(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter_map(|r| r.result.as_ref().ok())
    }
}

fn single_run(problem: &StructuralProblem, config: &BenchmarkConfig, seed: u64) -> Result<RunRecord> {
    match config.method {
        Method::Gsmo => gsmo_run(problem, &OptimizerConfig { seed, ..config.optimizer.clone() }),
        Method::Bigsmo => bigsmo_run(problem, &OptimizerConfig { seed, ..config.optimizer.clone() }),
        Method::Ga => ga_run(problem, &GaConfig { seed, ..config.ga.clone() }),
    }
}

/// Runs seeds `base_seed..base_seed + repeats`. Runs execute in parallel;
/// every run owns its random stream, so results do not depend on scheduling.
pub fn run_benchmark(problem: &StructuralProblem, config: &BenchmarkConfig) -> Result<BenchmarkResult> {
    if config.repeats == 0 {
        return Err(Error::Config("repeat count must be positive".into()));
    }
    config.optimizer.validate()?;
    config.ga.validate()?;
    let started = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let seeds: Vec<u64> = (0..config.repeats as u64).map(|k| config.base_seed + k).collect();
    let runs = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| RunOutcome { seed, result: single_run(problem, config, seed).map_err(|e| e.to_string()) })
            .collect()
    });
    Ok(BenchmarkResult {
        problem: problem.name.clone(),
        config: config.clone(),
        runs,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// One row of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub objective: f64,
    pub penalized: f64,
    pub max_violation: f64,
    pub temperature: f64,
}

pub const TRACE_HEADER: &str = "iteration,objective,penalized,max_violation,temperature";

fn penalty_of(config: &BenchmarkConfig) -> f64 {
    match config.method {
        Method::Ga => config.ga.penalty_factor,
        _ => config.optimizer.penalty_factor,
    }
}

/// Iteration rows followed by one row for the extracted final design.
pub fn trace(run: &RunRecord, config: &BenchmarkConfig) -> Vec<TraceRow> {
    let mut rows: Vec<TraceRow> = run
        .iterations
        .iter()
        .map(|it| TraceRow {
            iteration: it.iteration,
            objective: it.objective,
            penalized: it.penalized,
            max_violation: it.max_violation,
            temperature: it.temperature,
        })
        .collect();
    let n = run.iterations.len();
    let temperature = match run.method {
        Method::Ga => 0.0,
        _ => config.optimizer.anneal.temperature(n),
    };
    rows.push(TraceRow {
        iteration: n,
        objective: run.final_objective,
        penalized: penalized_objective(run.final_objective, &run.final_constraints, penalty_of(config)),
        max_violation: run.final_max_violation,
        temperature,
    });
    rows
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.iteration, r.objective, r.penalized, r.max_violation, r.temperature);
    }
    s
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_HEADER) {
        return Err(Error::Config("trace CSV has an unexpected header".into()));
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            let num = |i: usize| -> Result<f64> {
                f.get(i)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Config(format!("bad trace row '{line}'")))
            };
            if f.len() != 5 {
                return Err(Error::Config(format!("bad trace row '{line}'")));
            }
            Ok(TraceRow {
                iteration: f[0].parse().map_err(|_| Error::Config(format!("bad trace row '{line}'")))?,
                objective: num(1)?,
                penalized: num(2)?,
                max_violation: num(3)?,
                temperature: num(4)?,
            })
        })
        .collect()
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub seed: u64,
    pub status: String,
    pub iterations: usize,
    pub final_objective: Option<f64>,
    pub final_max_violation: Option<f64>,
    pub feasible: bool,
    pub fe_solves: usize,
    pub adjoint_solves: usize,
    pub error: Option<String>,
}

/// Statistics across runs at one row index of the traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub iteration: usize,
    pub runs: usize,
    pub mean_objective: f64,
    pub std_objective: f64,
    pub mean_penalized: f64,
}

/// Aggregate of a benchmark. Deterministic for a given problem, method,
/// configuration and seeds; timing lives in a separate file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub problem: String,
    pub method: Method,
    pub repeats: usize,
    pub base_seed: u64,
    pub completed_runs: usize,
    pub aborted_runs: usize,
    pub feasible_runs: usize,
    /// Over the final designs of completed runs.
    pub best_objective: Option<f64>,
    pub best_feasible_objective: Option<f64>,
    pub mean_objective: Option<f64>,
    pub std_objective: Option<f64>,
    pub total_fe_solves: usize,
    pub total_adjoint_solves: usize,
    pub runs: Vec<RunEntry>,
    pub convergence: Vec<ConvergencePoint>,
}

/// Statistics from per-run traces (the last row of each is the final design).
pub fn summarize_traces(traces: &[Vec<TraceRow>]) -> (Option<(f64, f64, f64)>, Vec<ConvergencePoint>) {
    let finals: Vec<f64> = traces.iter().filter_map(|t| t.last().map(|r| r.objective)).collect();
    let stats = (!finals.is_empty()).then(|| {
        let (mean, std) = mean_std(&finals);
        (finals.iter().copied().fold(f64::INFINITY, f64::min), mean, std)
    });
    let longest = traces.iter().map(Vec::len).max().unwrap_or(0);
    let convergence = (0..longest)
        .map(|i| {
            let rows: Vec<&TraceRow> = traces.iter().filter_map(|t| t.get(i)).collect();
            let objectives: Vec<f64> = rows.iter().map(|r| r.objective).collect();
            let (mean_objective, std_objective) = mean_std(&objectives);
            let penalized: Vec<f64> = rows.iter().map(|r| r.penalized).collect();
            ConvergencePoint {
                iteration: i,
                runs: rows.len(),
                mean_objective,
                std_objective,
                mean_penalized: mean_std(&penalized).0,
            }
        })
        .collect();
    (stats, convergence)
}

pub fn summarize(result: &BenchmarkResult) -> RunSummary {
    let traces: Vec<Vec<TraceRow>> = result.completed().map(|r| trace(r, &result.config)).collect();
    let (stats, convergence) = summarize_traces(&traces);
    let runs: Vec<RunEntry> = result
        .runs
        .iter()
        .map(|o| match &o.result {
            Ok(r) => RunEntry {
                seed: o.seed,
                status: "completed".into(),
                iterations: r.iterations.len(),
                final_objective: Some(r.final_objective),
                final_max_violation: Some(r.final_max_violation),
                feasible: r.feasible,
                fe_solves: r.fe_solves(),
                adjoint_solves: r.counts.adjoint,
                error: None,
            },
            Err(e) => RunEntry {
                seed: o.seed,
                status: "aborted".into(),
                iterations: 0,
                final_objective: None,
                final_max_violation: None,
                feasible: false,
                fe_solves: 0,
                adjoint_solves: 0,
                error: Some(e.clone()),
            },
        })
        .collect();
    let best_feasible_objective =
        result.completed().filter(|r| r.feasible).map(|r| r.final_objective).min_by(f64::total_cmp);
    RunSummary {
        schema_version: SCHEMA_VERSION,
        problem: result.problem.clone(),
        method: result.config.method,
        repeats: result.config.repeats,
        base_seed: result.config.base_seed,
        completed_runs: traces.len(),
        aborted_runs: result.runs.len() - traces.len(),
        feasible_runs: result.completed().filter(|r| r.feasible).count(),
        best_objective: stats.map(|s| s.0),
        best_feasible_objective,
        mean_objective: stats.map(|s| s.1),
        std_objective: stats.map(|s| s.2),
        total_fe_solves: runs.iter().map(|r| r.fe_solves).sum(),
        total_adjoint_solves: runs.iter().map(|r| r.adjoint_solves).sum(),
        runs,
        convergence,
    }
}

#[derive(Debug, Clone, Serialize)]
struct Timing {
    total_wall_time_s: f64,
    mean_run_wall_time_s: f64,
    runs: Vec<(u64, f64)>,
}

/// Writes `summary.json`, `timing.json`, and per completed run `k`
/// `run_<k>.csv` and `design_<k>.json` (k counts from 0 in seed order).
pub fn emit_outputs(result: &BenchmarkResult, problem: &StructuralProblem, dir: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(dir)?;
    let summary = summarize(result);
    for (k, outcome) in result.runs.iter().enumerate() {
        let Ok(run) = &outcome.result else { continue };
        std::fs::write(dir.join(format!("run_{k}.csv")), trace_csv(&trace(run, &result.config)))?;
        let doc = DesignDocument::from_run(problem, run);
        doc.validate(problem)?;
        std::fs::write(dir.join(format!("design_{k}.json")), doc.to_json())?;
    }
    let json = serde_json::to_string_pretty(&summary)?;
    std::fs::write(dir.join("summary.json"), json + "\n")?;
    let times: Vec<(u64, f64)> = result.completed().map(|r| (r.seed, r.wall_time_s)).collect();
    let timing = Timing {
        total_wall_time_s: result.wall_time_s,
        mean_run_wall_time_s: mean_std(&times.iter().map(|t| t.1).collect::<Vec<_>>()).0,
        runs: times,
    };
    let json = serde_json::to_string_pretty(&timing)?;
    std::fs::write(dir.join("timing.json"), json + "\n")?;
    Ok(summary)
}
