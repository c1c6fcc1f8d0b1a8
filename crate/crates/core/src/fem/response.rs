use nalgebra::DVector;

use super::assembly::{element_load, Assembly};
use super::element;
use super::model::FrameModel;
use super::realization::Realization;
use super::solve::SolutionState;
use crate::error::Result;

/// Total mass `Σ ρ·A·L`.
pub fn mass(model: &FrameModel, real: &Realization) -> f64 {
    (0..model.elements.len())
        .map(|i| {
            let (pa, pb) = real.element_ends(model, i);
            element::element_mass(&real.props[i], pa, pb)
        })
        .sum()
}

/// `½ uᵀ K u` for one load case.
pub fn strain_energy(assembly: &Assembly, state: &SolutionState, load_case: usize) -> f64 {
    let u = &state.displacements[load_case];
    0.5 * u.dot(&(&assembly.stiffness * u))
}

/// External work `fᵀu` for one load case.
pub fn compliance(assembly: &Assembly, state: &SolutionState, load_case: usize) -> f64 {
    assembly.loads[load_case].dot(&state.displacements[load_case])
}

/// Stress measure of `elem` under `load_case` and its gradient with respect
/// to that element's dofs (element dof order).
pub fn element_stress(
    model: &FrameModel,
    real: &Realization,
    assembly: &Assembly,
    state: &SolutionState,
    elem: usize,
    load_case: usize,
) -> Result<(f64, DVector<f64>)> {
    let u = assembly.dofs.gather(elem, &state.displacements[load_case]);
    element_stress_at(model, real, &u, elem, load_case)
}

/// Stress of `elem` for given element displacements `u`.
pub fn element_stress_at(
    model: &FrameModel,
    real: &Realization,
    u: &DVector<f64>,
    elem: usize,
    load_case: usize,
) -> Result<(f64, DVector<f64>)> {
    let fe = element_load(model, real, elem, load_case)?;
    let (pa, pb) = real.element_ends(model, elem);
    element::element_stress(&real.props[elem], pa, pb, u, &fe)
}
