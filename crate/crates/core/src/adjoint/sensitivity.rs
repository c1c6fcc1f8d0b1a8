use nalgebra::{DMatrix, DVector};

use super::attribute::AttributeMatrix;
use super::functions::{AnalysisState, Function};
use crate::error::{Error, Result};
use crate::fem::{stiffness_parameter_derivative, DofMap, Factorization, Parameter, ParameterDerivative};

/// Solves `K λ = rhs` on the free dofs with the primal factorization.
/// `rhs` and the returned `λ` are full-length; `λ` is zero on restrained dofs.
pub fn solve_adjoint(factor: &Factorization, dofs: &DofMap, rhs: &DVector<f64>) -> DVector<f64> {
    let r = dofs.restrict_free(rhs);
    if r.iter().all(|v| *v == 0.0) {
        return DVector::zeros(dofs.n_dofs());
    }
    dofs.expand_free(&factor.solve(&r))
}

/// Adjoint vectors of one function, one per load case it depends on.
pub struct Adjoint {
    pub lambdas: Vec<(usize, DVector<f64>)>,
}

impl Adjoint {
    pub fn compute(function: &Function<'_>, an: &AnalysisState<'_>) -> Result<Self> {
        let lambdas = function
            .state_gradient(an)?
            .into_iter()
            .map(|(lc, rhs)| (lc, solve_adjoint(&an.state.factorization, &an.assembly.dofs, &rhs)))
            .collect();
        Ok(Self { lambdas })
    }
}

/// `(dK/dp)·u − df/dp` for every load case: the pseudo-load of one parameter.
pub struct PseudoLoad {
    pub per_load_case: Vec<DVector<f64>>,
}

impl PseudoLoad {
    pub fn new(an: &AnalysisState<'_>, deriv: &ParameterDerivative) -> Self {
        let dofs = &an.assembly.dofs;
        let per_load_case = an
            .state
            .displacements
            .iter()
            .enumerate()
            .map(|(lc, u)| {
                if deriv.is_zero() {
                    DVector::zeros(dofs.n_dofs())
                } else {
                    deriv.stiffness_action(dofs, u) - deriv.load_derivative(dofs, lc)
                }
            })
            .collect();
        Self { per_load_case }
    }
}

/// Total derivative `∂J/∂p − Σ λᵀ((dK/dp)u − df/dp)` of a function with
/// respect to one parameter (a continuous variable or a selected-choice
/// attribute).
pub fn parameter_gradient(
    function: &Function<'_>,
    an: &AnalysisState<'_>,
    param: &Parameter,
    deriv: &ParameterDerivative,
    pseudo: &PseudoLoad,
    adjoint: &Adjoint,
) -> Result<f64> {
    let explicit = function.explicit_partial(an, param, deriv)?;
    let implicit: f64 = adjoint.lambdas.iter().map(|(lc, l)| l.dot(&pseudo.per_load_case[*lc])).sum();
    Ok(explicit - implicit)
}

/// Gradient of every function with respect to every parameter.
/// Returns a `functions × parameters` matrix.
pub fn gradient_matrix(
    functions: &[Function<'_>],
    an: &AnalysisState<'_>,
    params: &[Parameter],
) -> Result<DMatrix<f64>> {
    let adjoints = functions.iter().map(|f| Adjoint::compute(f, an)).collect::<Result<Vec<_>>>()?;
    let mut out = DMatrix::zeros(functions.len(), params.len());
    for (j, p) in params.iter().enumerate() {
        let deriv = stiffness_parameter_derivative(an.model, &an.real, p)?;
        let pseudo = PseudoLoad::new(an, &deriv);
        for (i, f) in functions.iter().enumerate() {
            out[(i, j)] = parameter_gradient(f, an, p, &deriv, &pseudo, &adjoints[i])?;
        }
    }
    Ok(out)
}

/// Chain rule from attribute sensitivities to logits:
/// `∇_θ J = (A · ∂s̃/∂θ)ᵀ ∇_a J`.
pub fn grad_logits(grad_a: &[f64], attr: &AttributeMatrix, jac: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = attr.n_choices();
    if grad_a.len() != attr.n_attributes() || jac.nrows() != n || jac.ncols() != n {
        return Err(Error::Config(format!(
            "logit chain got {} attribute gradients and a {}×{} Jacobian for a {}×{} attribute matrix",
            grad_a.len(),
            jac.nrows(),
            jac.ncols(),
            attr.n_attributes(),
            n
        )));
    }
    let ga = DVector::from_row_slice(grad_a);
    let per_choice = attr.values.transpose() * ga;
    Ok((jac.transpose() * per_choice).iter().copied().collect())
}
