use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use frameopt::adjoint::random_audit;
use frameopt::bench::{builtin, emit_outputs, run_benchmark, thread_cap, BenchmarkConfig, DesignDocument, ProblemDocument};
use frameopt::optimizer::{Bilevel, Method};
use frameopt::problem::DesignProblem;
use frameopt::{Error, Result};

#[derive(Parser)]
#[command(name = "frameopt", version, about = "Mixed categorical/continuous optimization of truss and frame structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded benchmark and write traces, designs and a summary.
    Run(RunArgs),
    /// Check a problem file (and optionally a design file against it).
    Validate {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        design: Option<PathBuf>,
    },
    /// Compare adjoint gradients with central differences at a random design.
    Fdcheck {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Relative finite-difference step.
        #[arg(long, default_value_t = 1e-6)]
        step: f64,
        /// Largest acceptable relative error.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Problem file or builtin:truss72, builtin:lattice:X,Y,Z, builtin:bridge:P.
    #[arg(long)]
    problem: String,
    #[arg(long, default_value = "gsmo")]
    method: Method,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long)]
    temp0: Option<f64>,
    #[arg(long)]
    decay: Option<f64>,
    #[arg(long)]
    tmin: Option<f64>,
    /// Outer and inner iteration counts, e.g. 10,10.
    #[arg(long, value_parser = parse_bilevel)]
    bilevel: Option<Bilevel>,
    /// Gumbel draws per categorical variable per iteration.
    #[arg(long)]
    samples: Option<usize>,
}

fn parse_bilevel(s: &str) -> std::result::Result<Bilevel, String> {
    let (o, i) = s.split_once(',').ok_or("expected OUTER,INNER")?;
    let n = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("'{v}': {e}"));
    Ok(Bilevel { outer: n(o)?, inner: n(i)? })
}

fn load(problem: &str) -> Result<ProblemDocument> {
    if problem.starts_with("builtin:") {
        builtin(problem)
    } else {
        ProblemDocument::load(Path::new(problem))
    }
}

fn run(args: RunArgs) -> Result<bool> {
    let doc = load(&args.problem)?;
    let problem = doc.build()?;
    let mut optimizer = doc.optimizer.clone();
    let mut ga = doc.ga.clone();
    if let Some(n) = args.max_iters {
        optimizer.max_iterations = n;
        ga.max_iterations = n;
    }
    if let Some(s) = args.step {
        optimizer.step_size = s;
    }
    if let Some(r) = args.penalty {
        optimizer.penalty_factor = r;
        ga.penalty_factor = r;
    }
    if let Some(t) = args.temp0 {
        optimizer.anneal.initial_temp = t;
    }
    if let Some(d) = args.decay {
        optimizer.anneal.decay = d;
    }
    if let Some(t) = args.tmin {
        optimizer.anneal.min_temp = t;
    }
    if args.bilevel.is_some() {
        optimizer.bilevel = args.bilevel;
    }
    if let Some(m) = args.samples {
        optimizer.samples = m;
    }
    let config = BenchmarkConfig {
        method: args.method,
        repeats: args.repeats,
        base_seed: args.seed,
        optimizer,
        ga,
        threads: thread_cap()?,
    };
    let result = run_benchmark(&problem, &config)?;
    let summary = emit_outputs(&result, &problem, &args.out)?;
    for r in &summary.runs {
        match (&r.error, r.final_objective) {
            (Some(e), _) => println!("seed {}: aborted: {e}", r.seed),
            (None, Some(f)) => println!(
                "seed {}: objective {f:.6} max violation {:.3e}{} ({} FE solves)",
                r.seed,
                r.final_max_violation.unwrap_or(f64::NAN),
                if r.feasible { "" } else { " INFEASIBLE" },
                r.fe_solves
            ),
            _ => {}
        }
    }
    if let (Some(best), Some(mean), Some(std)) = (summary.best_objective, summary.mean_objective, summary.std_objective) {
        println!(
            "{} {} over {} runs: best {best:.6}, mean {mean:.6}, std {std:.6}, feasible {}/{}",
            summary.problem, summary.method, summary.completed_runs, summary.feasible_runs, summary.repeats
        );
    }
    println!("wrote {} in {:.1} s", args.out.display(), result.wall_time_s);
    Ok(!result.any_aborted())
}

fn validate(problem: &str, design: Option<&Path>) -> Result<bool> {
    let doc = load(problem)?;
    let p = doc.build()?;
    println!(
        "{}: {} nodes, {} elements, {} load cases, {} continuous and {} categorical variables, {} constraints",
        p.name,
        p.model.nodes.len(),
        p.model.elements.len(),
        p.model.load_cases.len(),
        p.space.n_continuous(),
        p.space.n_categorical(),
        p.constraints.len()
    );
    if let Some(path) = design {
        let d = DesignDocument::from_json(&std::fs::read_to_string(path)?)?;
        d.validate(&p)?;
        let e = p.evaluate_choices(&d.design().choices, &d.x)?;
        println!("design {}: objective {:.6}, max violation {:.3e}", path.display(), e.objective, e.max_violation());
    }
    Ok(true)
}

fn fdcheck(problem: &str, seed: u64, step: f64, tol: f64) -> Result<bool> {
    if !(step > 0.0) {
        return Err(Error::Config("finite-difference step must be positive".into()));
    }
    let p = load(problem)?.build()?;
    let (attrs, chain) = random_audit(&p, seed, step)?;
    let mut ok = true;
    for (name, report) in [("continuous and attributes", &attrs), ("logit chain", &chain)] {
        let pass = report.passes(tol);
        ok &= pass;
        print!("{name}: {} derivatives, max relative error {:.3e}", report.entries.len(), report.max_rel_error);
        if let Some(w) = report.worst() {
            print!(" at d{}/d{} (adjoint {:.6e}, fd {:.6e})", w.function, w.coordinate, w.adjoint, w.fd);
        }
        println!(" {}", if pass { "ok" } else { "FAILED" });
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Validate { problem, design } => validate(&problem, design.as_deref()),
        Command::Fdcheck { problem, seed, step, tol } => fdcheck(&problem, seed, step, tol),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
