use std::time::Instant;

use super::{
    extract_design, penalized_gradient, penalized_objective, update_step, IterationRecord, Method, OptimizerConfig,
    Phase, RunRecord,
};
use crate::adjoint::grad_logits;
use crate::error::Result;
use crate::gsm::{draw_sample, run_rng, Logits, RunRng, SampleState};
use crate::problem::{DesignProblem, SolveCounts};

/// Constraint values up to this are treated as satisfied in reports.
pub const FEASIBILITY_TOL: f64 = 1e-9;

struct Run<'p, P: DesignProblem + ?Sized> {
    problem: &'p P,
    config: &'p OptimizerConfig,
    rng: RunRng,
    x: Vec<f64>,
    logits: Vec<Logits>,
    counts: SolveCounts,
    iterations: Vec<IterationRecord>,
}

impl<'p, P: DesignProblem + ?Sized> Run<'p, P> {
    fn new(problem: &'p P, config: &'p OptimizerConfig) -> Result<Self> {
        config.validate()?;
        let space = problem.space();
        let logits = space.categorical.iter().map(|c| Logits::uniform(c.n_choices())).collect::<Result<_>>()?;
        Ok(Self {
            problem,
            config,
            rng: run_rng(config.seed),
            x: space.initial_x(),
            logits,
            counts: SolveCounts::default(),
            iterations: Vec::new(),
        })
    }

    fn draw(&mut self, tau: f64) -> Result<Vec<SampleState>> {
        let (m, scaling) = (self.config.samples, self.config.jacobian_temperature_scaling);
        self.logits.iter().map(|t| draw_sample(t, tau, m, scaling, &mut self.rng)).collect()
    }

    /// One sample, one solve, one update of the variables selected by `phase`.
    /// Returns the penalized objective.
    fn iterate(&mut self, k: usize, phase: Phase) -> Result<f64> {
        let space = self.problem.space();
        let tau = self.config.anneal.temperature(k);
        let samples = self.draw(tau)?;
        let choices: Vec<usize> = samples.iter().map(|s| s.hard.index).collect();
        let attrs = space.hard_attributes(&choices);
        let (eval, grads) = self.problem.evaluate_with_gradients(&attrs, &self.x)?;
        self.counts += eval.counts;
        let r = self.config.penalty_factor;
        let penalized = penalized_objective(eval.objective, &eval.constraints, r);
        let gp = penalized_gradient(&eval, &grads, r);

        self.iterations.push(IterationRecord {
            iteration: self.iterations.len(),
            phase,
            temperature: tau,
            objective: eval.objective,
            penalized,
            max_violation: eval.max_violation(),
            choices,
            x: self.x.clone(),
            fe_solves: eval.counts.primal + eval.counts.modal,
        });

        let move_x = matches!(phase, Phase::Joint | Phase::Continuous);
        let move_theta = matches!(phase, Phase::Joint | Phase::Categorical);
        let grad_x = if move_x { gp.continuous.clone() } else { vec![0.0; self.x.len()] };
        let grad_theta = space
            .categorical
            .iter()
            .zip(&samples)
            .enumerate()
            .map(|(i, (c, s))| {
                if move_theta {
                    grad_logits(&gp.attributes[i], &c.matrix, &s.jacobian)
                } else {
                    Ok(vec![0.0; c.n_choices()])
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if !gp.is_finite() {
            return Err(crate::Error::Numerical(format!("non-finite gradient at iteration {k}")));
        }
        let (x, logits) = update_step(space, &self.x, &self.logits, &grad_x, &grad_theta, self.config.step_size)?;
        if move_x {
            self.x = x;
        }
        if move_theta {
            self.logits = logits;
        }
        Ok(penalized)
    }

    fn finish(self, method: Method, started: Instant) -> Result<RunRecord> {
        let space = self.problem.space();
        let design = extract_design(space, &self.logits, &self.x);
        let eval = self.problem.evaluate_choices(&design.choices, &design.x)?;
        let max_violation = eval.max_violation();
        Ok(RunRecord {
            method,
            seed: self.config.seed,
            iterations: self.iterations,
            design,
            final_objective: eval.objective,
            final_constraints: eval.constraints,
            final_max_violation: max_violation,
            feasible: max_violation <= FEASIBILITY_TOL,
            counts: self.counts,
            wall_time_s: started.elapsed().as_secs_f64(),
        })
    }
}

/// Simultaneous optimization of logits and continuous variables.
///
/// Each iteration draws fresh Gumbel noise for every categorical variable (in
/// variable order, from one stream seeded by `config.seed`), solves once at the
/// straight-through choices, and steps both variable classes on the penalized
/// objective.
pub fn gsmo_run<P: DesignProblem + ?Sized>(problem: &P, config: &OptimizerConfig) -> Result<RunRecord> {
    let started = Instant::now();
    let mut run = Run::new(problem, config)?;
    let mut previous: Option<f64> = None;
    for k in 0..config.max_iterations {
        let p = run.iterate(k, Phase::Joint)?;
        if config.convergence_tol > 0.0 {
            if let Some(q) = previous {
                if (p - q).abs() <= config.convergence_tol * q.abs() {
                    break;
                }
            }
        }
        previous = Some(p);
    }
    run.finish(Method::Gsmo, started)
}

/// Bilevel optimization: `inner` logit-only iterations, then one fresh sample
/// and one continuous step, repeated `outer` times (`config.bilevel`, default
/// 10 × 10).
///
/// Without categorical variables the inner loop is skipped; without
/// continuous variables the continuous phase is skipped. The temperature
/// follows the global iteration count.
pub fn bigsmo_run<P: DesignProblem + ?Sized>(problem: &P, config: &OptimizerConfig) -> Result<RunRecord> {
    let started = Instant::now();
    let bilevel = config.bilevel.unwrap_or_default();
    let mut run = Run::new(problem, config)?;
    let space = problem.space();
    let mut k = 0;
    for _ in 0..bilevel.outer {
        if space.n_categorical() > 0 {
            for _ in 0..bilevel.inner {
                run.iterate(k, Phase::Categorical)?;
                k += 1;
            }
        }
        if space.n_continuous() > 0 {
            run.iterate(k, Phase::Continuous)?;
            k += 1;
        }
    }
    run.finish(Method::Bigsmo, started)
}
