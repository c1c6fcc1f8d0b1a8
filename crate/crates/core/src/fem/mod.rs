//! Linear-elastic finite elements for 3D trusses and Euler-Bernoulli frames.

mod assembly;
mod derivative;
pub mod element;
mod modal;
mod model;
mod parameter;
mod realization;
mod response;
mod solve;

pub use assembly::{assemble, element_load, lumped_mass, Assembly, DofMap};
pub use derivative::{stiffness_parameter_derivative, ParameterDerivative};
pub use modal::{smallest_mode, Modal};
pub use model::{
    CrossSection, DistributedLoad, Element, ElementKind, FrameModel, LoadCase, Material, Node, PointLoad,
    Support, NODE_DOFS,
};
pub use parameter::{fd_step, Parameter};
pub use realization::{Attribute, ElementProps, Realization};
pub use response::{compliance, element_stress, element_stress_at, mass, strain_energy};
pub use solve::{solve, Factorization, SolutionState};

use crate::error::Result;

/// Assembles, solves and returns the lowest natural frequency in Hz.
pub fn smallest_frequency(model: &FrameModel, real: &Realization) -> Result<f64> {
    let assembly = assemble(model, real)?;
    let factor = Factorization::new(&assembly)?;
    let m = lumped_mass(model, real, &assembly.dofs);
    Ok(smallest_mode(&assembly, &factor, &m)?.frequency_hz())
}
