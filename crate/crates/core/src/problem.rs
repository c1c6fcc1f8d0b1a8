//! The evaluation interface shared by the optimizers, and its finite-element
//! implementation.

use serde::{Deserialize, Serialize};

use crate::adjoint::{gradient_matrix, AnalysisState, Constraint, Function, Objective};
use crate::design::DesignSpace;
use crate::error::{Error, Result};
use crate::fem::{self, FrameModel, Parameter};

/// Solver work spent on one evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveCounts {
    /// Factorize-and-solve of the governing equations (all load cases at once).
    pub primal: usize,
    /// One per differentiated function.
    pub adjoint: usize,
    /// Eigenvalue solves for frequency constraints.
    pub modal: usize,
}

impl std::ops::AddAssign for SolveCounts {
    fn add_assign(&mut self, o: Self) {
        self.primal += o.primal;
        self.adjoint += o.adjoint;
        self.modal += o.modal;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    /// Dimensionless constraint values, feasible when `≤ 0`.
    pub constraints: Vec<f64>,
    pub counts: SolveCounts,
}

impl Evaluation {
    pub fn max_violation(&self) -> f64 {
        self.constraints.iter().fold(0.0f64, |m, g| m.max(*g))
    }
}

/// Gradient of one function with respect to the continuous variables and to
/// the attributes of each categorical variable's selected choice.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionGradient {
    pub continuous: Vec<f64>,
    pub attributes: Vec<Vec<f64>>,
}

impl FunctionGradient {
    pub fn zeros(space: &DesignSpace) -> Self {
        Self {
            continuous: vec![0.0; space.n_continuous()],
            attributes: space.categorical.iter().map(|c| vec![0.0; c.matrix.n_attributes()]).collect(),
        }
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, other: &FunctionGradient, scale: f64) {
        for (a, b) in self.continuous.iter_mut().zip(&other.continuous) {
            *a += scale * b;
        }
        for (va, vb) in self.attributes.iter_mut().zip(&other.attributes) {
            for (a, b) in va.iter_mut().zip(vb) {
                *a += scale * b;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.continuous.iter().chain(self.attributes.iter().flatten()).all(|v| v.is_finite())
    }
}

/// Gradients of the objective and of each constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    pub objective: FunctionGradient,
    pub constraints: Vec<FunctionGradient>,
}

/// A design problem the optimizers can drive.
///
/// Categorical variables enter through attribute vectors: hard choices pass
/// the selected column of the attribute matrix, relaxed checks may pass any
/// mixture.
pub trait DesignProblem: Sync {
    fn space(&self) -> &DesignSpace;

    fn evaluate(&self, attributes: &[Vec<f64>], x: &[f64]) -> Result<Evaluation>;

    fn evaluate_with_gradients(&self, attributes: &[Vec<f64>], x: &[f64]) -> Result<(Evaluation, GradientBundle)>;

    /// Constraint names for reports.
    fn constraint_labels(&self) -> Vec<String>;

    fn evaluate_choices(&self, choices: &[usize], x: &[f64]) -> Result<Evaluation> {
        self.evaluate(&self.space().hard_attributes(choices), x)
    }
}

/// A finite-element backed problem: model, design space, objective, constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralProblem {
    pub name: String,
    pub model: FrameModel,
    pub space: DesignSpace,
    pub objective: Objective,
    pub constraints: Vec<Constraint>,
}

impl StructuralProblem {
    pub fn new(
        name: impl Into<String>,
        model: FrameModel,
        space: DesignSpace,
        objective: Objective,
        constraints: Vec<Constraint>,
    ) -> Result<Self> {
        let p = Self { name: name.into(), model, space, objective, constraints };
        p.validate()?;
        Ok(p)
    }

    /// Model, bindings and constraints are consistent, and the initial design
    /// is not a mechanism.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.model.load_cases.is_empty() {
            return Err(Error::Config("problem needs at least one load case".into()));
        }
        self.space.validate(Some(&self.model))?;
        for c in &self.constraints {
            c.validate(&self.model)?;
        }
        let choices = vec![0; self.space.n_categorical()];
        let attrs = self.space.hard_attributes(&choices);
        let real = self.space.realize(&self.model, &attrs, &self.space.initial_x())?;
        let assembly = fem::assemble(&self.model, &real)?;
        fem::Factorization::new(&assembly)?;
        Ok(())
    }

    fn has_frequency(&self) -> bool {
        self.constraints.iter().any(|c| matches!(c, Constraint::Frequency { .. }))
    }

    /// Assembles, solves and (when needed) runs the modal solve.
    pub fn analyze(&self, attributes: &[Vec<f64>], x: &[f64]) -> Result<(AnalysisState<'_>, SolveCounts)> {
        let real = self.space.realize(&self.model, attributes, x)?;
        let assembly = fem::assemble(&self.model, &real)?;
        let state = fem::solve(&assembly)?;
        let mut counts = SolveCounts { primal: 1, ..Default::default() };
        let modal = if self.has_frequency() {
            counts.modal = 1;
            let m = fem::lumped_mass(&self.model, &real, &assembly.dofs);
            Some(fem::smallest_mode(&assembly, &state.factorization, &m)?)
        } else {
            None
        };
        Ok((AnalysisState { model: &self.model, real, assembly, state, modal }, counts))
    }

    fn functions(&self) -> Vec<Function<'_>> {
        std::iter::once(Function::Objective(self.objective))
            .chain(self.constraints.iter().map(Function::Constraint))
            .collect()
    }

    fn values(&self, an: &AnalysisState<'_>) -> Result<(f64, Vec<f64>)> {
        let objective = Function::Objective(self.objective).value(an)?;
        let constraints =
            self.constraints.iter().map(|c| Function::Constraint(c).value(an)).collect::<Result<Vec<_>>>()?;
        if !objective.is_finite() || constraints.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numerical("non-finite objective or constraint value".into()));
        }
        Ok((objective, constraints))
    }

    /// Every model parameter that carries a design sensitivity, in order:
    /// continuous variables, then attribute rows of each categorical variable.
    fn parameters(&self) -> Vec<Parameter> {
        self.space
            .continuous
            .iter()
            .map(|v| v.binding.clone())
            .chain(self.space.categorical.iter().flat_map(|c| c.parameters()))
            .collect()
    }
}

impl DesignProblem for StructuralProblem {
    fn space(&self) -> &DesignSpace {
        &self.space
    }

    fn evaluate(&self, attributes: &[Vec<f64>], x: &[f64]) -> Result<Evaluation> {
        let (an, counts) = self.analyze(attributes, x)?;
        let (objective, constraints) = self.values(&an)?;
        Ok(Evaluation { objective, constraints, counts })
    }

    fn evaluate_with_gradients(&self, attributes: &[Vec<f64>], x: &[f64]) -> Result<(Evaluation, GradientBundle)> {
        let (an, mut counts) = self.analyze(attributes, x)?;
        if let (Some(modal), true) = (&an.modal, self.has_frequency()) {
            if let Some(gap) = modal.relative_gap() {
                if gap < 1e-6 {
                    return Err(Error::Numerical(format!(
                        "lowest eigenvalue is repeated (relative gap {gap:.2e}); frequency gradient undefined"
                    )));
                }
            }
        }
        let (objective, constraints) = self.values(&an)?;
        let functions = self.functions();
        let params = self.parameters();
        let grads = gradient_matrix(&functions, &an, &params)?;
        counts.adjoint = functions.len();

        let nx = self.space.n_continuous();
        let unpack = |row: usize| {
            let mut k = nx;
            let attributes = self
                .space
                .categorical
                .iter()
                .map(|c| {
                    let n = c.matrix.n_attributes();
                    let v: Vec<f64> = (k..k + n).map(|j| grads[(row, j)]).collect();
                    k += n;
                    v
                })
                .collect();
            FunctionGradient { continuous: (0..nx).map(|j| grads[(row, j)]).collect(), attributes }
        };
        let bundle = GradientBundle {
            objective: unpack(0),
            constraints: (1..functions.len()).map(unpack).collect(),
        };
        Ok((Evaluation { objective, constraints, counts }, bundle))
    }

    fn constraint_labels(&self) -> Vec<String> {
        self.constraints.iter().map(Constraint::label).collect()
    }
}
