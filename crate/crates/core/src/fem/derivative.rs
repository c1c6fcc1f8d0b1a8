//! Derivatives of stiffness, lumped mass and loads with respect to one
//! design parameter, stored element by element so `(dK/dp)·v` never needs a
//! dense global matrix.

use nalgebra::{DMatrix, DVector};

use super::assembly::{element_load, DofMap};
use super::element;
use super::model::FrameModel;
use super::parameter::Parameter;
use super::realization::Realization;
use crate::error::Result;

struct Contribution {
    stiffness: DMatrix<f64>,
    loads: Vec<DVector<f64>>,
    mass: DVector<f64>,
}

fn contribution(model: &FrameModel, real: &Realization, elem: usize) -> Result<Contribution> {
    let p = &real.props[elem];
    let (pa, pb) = real.element_ends(model, elem);
    let loads = (0..model.load_cases.len())
        .map(|lc| element_load(model, real, elem, lc))
        .collect::<Result<Vec<_>>>()?;
    Ok(Contribution {
        stiffness: element::element_stiffness(p, pa, pb)?,
        loads,
        mass: element::lumped_mass_diagonal(p, pa, pb),
    })
}

impl Contribution {
    fn difference(self, other: Contribution, scale: f64) -> Contribution {
        Contribution {
            stiffness: (self.stiffness - other.stiffness) * scale,
            loads: self.loads.into_iter().zip(other.loads).map(|(a, b)| (a - b) * scale).collect(),
            mass: (self.mass - other.mass) * scale,
        }
    }
}

/// Element-wise `dK/dp`, `dM/dp` and `df/dp` of one parameter.
pub struct ParameterDerivative {
    elements: Vec<usize>,
    parts: Vec<Contribution>,
}

/// Derivative of K (and M, f) with respect to `param` at the given realization.
///
/// Exact for section and material attributes, in which everything is affine;
/// central differences for geometric parameters (coordinates, roll).
pub fn stiffness_parameter_derivative(
    model: &FrameModel,
    real: &Realization,
    param: &Parameter,
) -> Result<ParameterDerivative> {
    if param.is_response_only() {
        return Ok(ParameterDerivative { elements: Vec::new(), parts: Vec::new() });
    }
    let elements = param.affected_elements(model);
    let mut parts = Vec::with_capacity(elements.len());
    if param.is_affine() {
        let mut one = real.clone();
        let mut zero = real.clone();
        param.apply(&mut one, 1.0);
        param.apply(&mut zero, 0.0);
        for &e in &elements {
            parts.push(contribution(model, &one, e)?.difference(contribution(model, &zero, e)?, 1.0));
        }
    } else {
        let p0 = param.value(real);
        let h = param.fd_step(p0);
        let mut up = real.clone();
        let mut dn = real.clone();
        param.apply(&mut up, p0 + h);
        param.apply(&mut dn, p0 - h);
        for &e in &elements {
            parts.push(contribution(model, &up, e)?.difference(contribution(model, &dn, e)?, 0.5 / h));
        }
    }
    Ok(ParameterDerivative { elements, parts })
}

impl ParameterDerivative {
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn is_zero(&self) -> bool {
        self.elements.is_empty()
    }

    /// `(dK/dp)·v` for a full-length `v`.
    pub fn stiffness_action(&self, dofs: &DofMap, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(dofs.n_dofs());
        for (&e, part) in self.elements.iter().zip(&self.parts) {
            let ve = dofs.gather(e, v);
            let r = &part.stiffness * ve;
            for (a, &i) in dofs.element_dofs(e).iter().enumerate() {
                out[i] += r[a];
            }
        }
        out
    }

    /// `aᵀ (dK/dp) b`.
    pub fn stiffness_quadratic(&self, dofs: &DofMap, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.elements
            .iter()
            .zip(&self.parts)
            .map(|(&e, part)| dofs.gather(e, a).dot(&(&part.stiffness * dofs.gather(e, b))))
            .sum()
    }

    /// `df/dp` for one load case, full length.
    pub fn load_derivative(&self, dofs: &DofMap, load_case: usize) -> DVector<f64> {
        let mut out = DVector::zeros(dofs.n_dofs());
        for (&e, part) in self.elements.iter().zip(&self.parts) {
            for (a, &i) in dofs.element_dofs(e).iter().enumerate() {
                out[i] += part.loads[load_case][a];
            }
        }
        out
    }

    /// Diagonal of `dM/dp`, full length.
    pub fn mass_derivative(&self, dofs: &DofMap) -> DVector<f64> {
        let mut out = DVector::zeros(dofs.n_dofs());
        for (&e, part) in self.elements.iter().zip(&self.parts) {
            for (a, &i) in dofs.element_dofs(e).iter().enumerate() {
                out[i] += part.mass[a];
            }
        }
        out
    }

    /// Assembled `dK/dp` as a dense matrix. Intended for checks on small models.
    pub fn dense(&self, dofs: &DofMap) -> DMatrix<f64> {
        let n = dofs.n_dofs();
        let mut out = DMatrix::zeros(n, n);
        for (&e, part) in self.elements.iter().zip(&self.parts) {
            super::assembly::scatter_matrix(&mut out, dofs.element_dofs(e), &part.stiffness);
        }
        out
    }
}
