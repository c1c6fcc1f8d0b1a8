//! Objective and constraint functions of a structural design.
//!
//! Constraints are dimensionless and satisfied when `g ≤ 0`.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    self, Assembly, FrameModel, Modal, Parameter, ParameterDerivative, Realization, SolutionState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Mass,
    /// `Σ fᵀu` over load cases.
    Compliance,
    /// `Σ ½uᵀKu` over load cases.
    StrainEnergy,
    /// The constant zero (pure feasibility problems).
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    /// `σ/σ_yield − 1` for one element under one load case.
    Stress { element: usize, load_case: usize },
    /// `|u|/limit − 1` for one nodal dof (`dof` in 0..6) under one load case.
    Displacement { node: usize, dof: usize, load_case: usize, limit: f64 },
    /// `1 − f₁/min_hz` on the smallest natural frequency.
    Frequency { min_hz: f64 },
    /// `1 − x_final/x_initial` for one coordinate of a node (no shrinkage).
    Stretch { node: usize, axis: usize, load_case: usize },
}

impl Constraint {
    pub fn validate(&self, model: &FrameModel) -> Result<()> {
        let n_lc = model.load_cases.len();
        let bad = |msg: String| Err(Error::Config(msg));
        match *self {
            Constraint::Stress { element, load_case } => {
                if element >= model.elements.len() || load_case >= n_lc {
                    return bad(format!("stress constraint on element {element}, load case {load_case} is out of range"));
                }
            }
            Constraint::Displacement { node, dof, load_case, limit } => {
                if node >= model.nodes.len() || dof >= 6 || load_case >= n_lc || !(limit > 0.0) {
                    return bad(format!("displacement constraint on node {node} is malformed"));
                }
            }
            Constraint::Frequency { min_hz } => {
                if !(min_hz > 0.0) {
                    return bad("frequency bound must be positive".into());
                }
            }
            Constraint::Stretch { node, axis, load_case } => {
                if node >= model.nodes.len() || axis > 2 || load_case >= n_lc {
                    return bad(format!("stretch constraint on node {node} is malformed"));
                }
                if model.nodes[node].position[axis] == 0.0 {
                    return bad(format!("stretch constraint on node {} needs a nonzero coordinate", node + 1));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            Constraint::Stress { element, load_case } => format!("stress[e{},lc{}]", element + 1, load_case + 1),
            Constraint::Displacement { node, dof, load_case, .. } => {
                format!("disp[n{},d{},lc{}]", node + 1, dof, load_case + 1)
            }
            Constraint::Frequency { .. } => "frequency".into(),
            Constraint::Stretch { node, axis, load_case } => format!("stretch[n{},a{},lc{}]", node + 1, axis, load_case + 1),
        }
    }
}

/// Everything a function needs after the primal solve.
pub struct AnalysisState<'a> {
    pub model: &'a FrameModel,
    pub real: Realization,
    pub assembly: Assembly,
    pub state: SolutionState,
    pub modal: Option<Modal>,
}

/// Either the objective or one constraint.
#[derive(Debug, Clone, Copy)]
pub enum Function<'f> {
    Objective(Objective),
    Constraint(&'f Constraint),
}

fn dof_of(an: &AnalysisState<'_>, node: usize, slot: usize) -> Result<usize> {
    an.assembly
        .dofs
        .dof(node, slot)
        .ok_or_else(|| Error::Config(format!("node {} has no active dof {slot}", node + 1)))
}

impl Function<'_> {
    pub fn value(&self, an: &AnalysisState<'_>) -> Result<f64> {
        let n_lc = an.model.load_cases.len();
        Ok(match *self {
            Function::Objective(Objective::Mass) => fem::mass(an.model, &an.real),
            Function::Objective(Objective::Compliance) => {
                (0..n_lc).map(|lc| fem::compliance(&an.assembly, &an.state, lc)).sum()
            }
            Function::Objective(Objective::StrainEnergy) => {
                (0..n_lc).map(|lc| fem::strain_energy(&an.assembly, &an.state, lc)).sum()
            }
            Function::Objective(Objective::Zero) => 0.0,
            Function::Constraint(c) => match *c {
                Constraint::Stress { element, load_case } => {
                    let (s, _) = fem::element_stress(an.model, &an.real, &an.assembly, &an.state, element, load_case)?;
                    s / an.real.props[element].yield_stress - 1.0
                }
                Constraint::Displacement { node, dof, load_case, limit } => {
                    let d = dof_of(an, node, dof)?;
                    an.state.displacements[load_case][d].abs() / limit - 1.0
                }
                Constraint::Frequency { min_hz } => {
                    let modal = an.modal.as_ref().ok_or_else(|| Error::Config("frequency constraint without a modal solve".into()))?;
                    1.0 - modal.frequency_hz() / min_hz
                }
                Constraint::Stretch { node, axis, load_case } => {
                    let d = dof_of(an, node, axis)?;
                    let x0 = an.real.positions[node][axis];
                    -an.state.displacements[load_case][d] / x0
                }
            },
        })
    }

    /// `∇_u` of the function, one full-length vector per load case it reads.
    pub fn state_gradient(&self, an: &AnalysisState<'_>) -> Result<Vec<(usize, DVector<f64>)>> {
        let n = an.assembly.dofs.n_dofs();
        let n_lc = an.model.load_cases.len();
        Ok(match *self {
            Function::Objective(Objective::Mass | Objective::Zero) => Vec::new(),
            Function::Objective(Objective::Compliance) => (0..n_lc).map(|lc| (lc, an.assembly.loads[lc].clone())).collect(),
            Function::Objective(Objective::StrainEnergy) => (0..n_lc)
                .map(|lc| (lc, &an.assembly.stiffness * &an.state.displacements[lc]))
                .collect(),
            Function::Constraint(c) => match *c {
                Constraint::Stress { element, load_case } => {
                    let (_, ge) = fem::element_stress(an.model, &an.real, &an.assembly, &an.state, element, load_case)?;
                    let sy = an.real.props[element].yield_stress;
                    let mut g = DVector::zeros(n);
                    for (a, &i) in an.assembly.dofs.element_dofs(element).iter().enumerate() {
                        g[i] += ge[a] / sy;
                    }
                    vec![(load_case, g)]
                }
                Constraint::Displacement { node, dof, load_case, limit } => {
                    let d = dof_of(an, node, dof)?;
                    let u = an.state.displacements[load_case][d];
                    let mut g = DVector::zeros(n);
                    g[d] = if u >= 0.0 { 1.0 } else { -1.0 } / limit;
                    vec![(load_case, g)]
                }
                Constraint::Frequency { .. } => Vec::new(),
                Constraint::Stretch { node, axis, load_case } => {
                    let d = dof_of(an, node, axis)?;
                    let mut g = DVector::zeros(n);
                    g[d] = -1.0 / an.real.positions[node][axis];
                    vec![(load_case, g)]
                }
            },
        })
    }

    /// Partial derivative with respect to `param` at fixed displacements.
    ///
    /// Frequency constraints return the full modal sensitivity here, since
    /// they need no adjoint.
    pub fn explicit_partial(
        &self,
        an: &AnalysisState<'_>,
        param: &Parameter,
        deriv: &ParameterDerivative,
    ) -> Result<f64> {
        let dofs = &an.assembly.dofs;
        let n_lc = an.model.load_cases.len();
        Ok(match *self {
            // every node of a truss or beam carries three translational mass slots
            Function::Objective(Objective::Mass) => deriv.mass_derivative(dofs).sum() / 3.0,
            Function::Objective(Objective::Compliance) => (0..n_lc)
                .map(|lc| deriv.load_derivative(dofs, lc).dot(&an.state.displacements[lc]))
                .sum(),
            Function::Objective(Objective::StrainEnergy) => (0..n_lc)
                .map(|lc| {
                    let u = &an.state.displacements[lc];
                    0.5 * deriv.stiffness_quadratic(dofs, u, u)
                })
                .sum(),
            Function::Objective(Objective::Zero) => 0.0,
            Function::Constraint(c) => match *c {
                Constraint::Stress { element, load_case } => {
                    if !param.affected_elements(an.model).contains(&element) {
                        return Ok(0.0);
                    }
                    let u = dofs.gather(element, &an.state.displacements[load_case]);
                    let p0 = param.value(&an.real);
                    let h = param.fd_step(p0);
                    let eval = |v: f64| -> Result<f64> {
                        let mut r = an.real.clone();
                        param.apply(&mut r, v);
                        let (s, _) = fem::element_stress_at(an.model, &r, &u, element, load_case)?;
                        Ok(s / r.props[element].yield_stress)
                    };
                    (eval(p0 + h)? - eval(p0 - h)?) / (2.0 * h)
                }
                Constraint::Displacement { .. } => 0.0,
                Constraint::Frequency { min_hz } => {
                    let modal = an.modal.as_ref().ok_or_else(|| Error::Config("frequency constraint without a modal solve".into()))?;
                    let phi = &modal.mode;
                    let lambda = modal.eigenvalue;
                    let dk = deriv.stiffness_quadratic(dofs, phi, phi);
                    let dm = deriv.mass_derivative(dofs).component_mul(phi).dot(phi);
                    let dlambda = dk - lambda * dm;
                    let dfreq = dlambda / (4.0 * PI * lambda.sqrt());
                    -dfreq / min_hz
                }
                Constraint::Stretch { node, axis, load_case } => {
                    if param.targets_node(node, axis) {
                        let d = dof_of(an, node, axis)?;
                        let x0 = an.real.positions[node][axis];
                        an.state.displacements[load_case][d] / (x0 * x0)
                    } else {
                        0.0
                    }
                }
            },
        })
    }
}
