//! Gradient-based optimizers over mixed categorical and continuous designs.
//!
//! [`gsmo_run`] updates logits and continuous variables together from one
//! straight-through sample per iteration. [`bigsmo_run`] alternates: an inner
//! loop that moves only the logits, then one continuous step per outer pass.
//! Constraints enter through the quadratic penalty of [`penalized_objective`].

mod gsmo;

use serde::{Deserialize, Serialize};

pub use gsmo::{bigsmo_run, gsmo_run, FEASIBILITY_TOL};

use crate::design::DesignSpace;
use crate::error::{Error, Result};
use crate::gsm::{argmax, AnnealSchedule, Logits};
use crate::problem::{Evaluation, FunctionGradient, GradientBundle, SolveCounts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bilevel {
    pub outer: usize,
    pub inner: usize,
}

impl Default for Bilevel {
    fn default() -> Self {
        Self { outer: 10, inner: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub step_size: f64,
    pub max_iterations: usize,
    pub penalty_factor: f64,
    pub anneal: AnnealSchedule,
    pub seed: u64,
    /// Outer and inner iteration counts for the bilevel scheme.
    pub bilevel: Option<Bilevel>,
    /// Relative change of the penalized objective below which a run stops
    /// early. Zero runs the full budget.
    pub convergence_tol: f64,
    /// Gumbel draws per categorical variable per iteration.
    pub samples: usize,
    /// Include the `1/τ` factor of the soft-sample Jacobian.
    pub jacobian_temperature_scaling: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            step_size: 1e-3,
            max_iterations: 100,
            penalty_factor: 1000.0,
            anneal: AnnealSchedule::default(),
            seed: 0,
            bilevel: None,
            convergence_tol: 0.0,
            samples: 1,
            jacobian_temperature_scaling: true,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::Config("step size must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("iteration budget must be positive".into()));
        }
        if !(self.penalty_factor >= 0.0) {
            return Err(Error::Config("penalty factor must be nonnegative".into()));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(Error::Config("convergence tolerance must be nonnegative".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("sample count must be at least 1".into()));
        }
        if let Some(b) = self.bilevel {
            if b.outer == 0 || b.inner == 0 {
                return Err(Error::Config("bilevel iteration counts must be positive".into()));
            }
        }
        self.anneal.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gsmo,
    Bigsmo,
    Ga,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gsmo" => Ok(Method::Gsmo),
            "bigsmo" => Ok(Method::Bigsmo),
            "ga" => Ok(Method::Ga),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Gsmo => "gsmo",
            Method::Bigsmo => "bigsmo",
            Method::Ga => "ga",
        })
    }
}

/// Which variables an iteration updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Joint,
    Categorical,
    Continuous,
    Generation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub phase: Phase,
    pub temperature: f64,
    pub objective: f64,
    pub penalized: f64,
    pub max_violation: f64,
    pub choices: Vec<usize>,
    pub x: Vec<f64>,
    pub fe_solves: usize,
}

/// A concrete design: one choice per categorical variable and the continuous
/// values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub choices: Vec<usize>,
    pub labels: Vec<String>,
    /// Final probability of each chosen class (1 for designs without a
    /// distribution behind them).
    pub probabilities: Vec<f64>,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub seed: u64,
    pub iterations: Vec<IterationRecord>,
    pub design: Design,
    /// Evaluation of `design` after the run (not counted in `counts`).
    pub final_objective: f64,
    pub final_constraints: Vec<f64>,
    pub final_max_violation: f64,
    pub feasible: bool,
    /// Solver work inside the optimization loop.
    pub counts: SolveCounts,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn fe_solves(&self) -> usize {
        self.counts.primal + self.counts.modal
    }
}

/// `J + r·Σ max(0, g)²`.
pub fn penalized_objective(objective: f64, constraints: &[f64], penalty_factor: f64) -> f64 {
    objective + penalty_factor * constraints.iter().map(|g| g.max(0.0).powi(2)).sum::<f64>()
}

/// Gradient of [`penalized_objective`] from the function gradients.
pub fn penalized_gradient(eval: &Evaluation, grads: &GradientBundle, penalty_factor: f64) -> FunctionGradient {
    let mut out = grads.objective.clone();
    for (g, dg) in eval.constraints.iter().zip(&grads.constraints) {
        if *g > 0.0 {
            out.add_scaled(dg, 2.0 * penalty_factor * g);
        }
    }
    out
}

/// Projected gradient step.
///
/// Continuous variables step on their bound-normalized scale `z = (x−lb)/(ub−lb)`,
/// which in physical units is `x − step·(ub−lb)²·∇x`, then clamp to bounds.
/// Logits step without renormalization.
pub fn update_step(
    space: &DesignSpace,
    x: &[f64],
    logits: &[Logits],
    grad_x: &[f64],
    grad_logits: &[Vec<f64>],
    step: f64,
) -> Result<(Vec<f64>, Vec<Logits>)> {
    if grad_x.iter().chain(grad_logits.iter().flatten()).any(|g| !g.is_finite()) {
        return Err(Error::Numerical("non-finite gradient; aborting the run".into()));
    }
    if x.len() != space.n_continuous() || grad_x.len() != x.len() || logits.len() != grad_logits.len() {
        return Err(Error::Config("update dimensions do not match the design space".into()));
    }
    let x_new = space
        .continuous
        .iter()
        .zip(x.iter().zip(grad_x))
        .map(|(v, (&xi, &gi))| {
            let w = v.upper - v.lower;
            (xi - step * w * w * gi).clamp(v.lower, v.upper)
        })
        .collect();
    let mut theta_new = logits.to_vec();
    for (t, g) in theta_new.iter_mut().zip(grad_logits) {
        t.descend(g, step)?;
    }
    Ok((x_new, theta_new))
}

/// Most probable choice of every categorical variable and its probability.
pub fn extract_design(space: &DesignSpace, logits: &[Logits], x: &[f64]) -> Design {
    let mut choices = Vec::with_capacity(logits.len());
    let mut probabilities = Vec::with_capacity(logits.len());
    let mut labels = Vec::with_capacity(logits.len());
    for (c, l) in space.categorical.iter().zip(logits) {
        let k = argmax(l.as_slice());
        choices.push(k);
        probabilities.push(l.probabilities()[k]);
        labels.push(c.labels[k].clone());
    }
    Design { choices, labels, probabilities, x: x.to_vec() }
}
