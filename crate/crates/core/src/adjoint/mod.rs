//! Adjoint sensitivity analysis.
//!
//! For a function `J(u, p)` of the displacements `K u = f`, one solve
//! `K λ = ∇_u J` with the existing factorization gives
//! `dJ/dp = ∂J/∂p − λᵀ((dK/dp)u − df/dp)` for every parameter `p` at once.
//! Selected-choice attributes of categorical variables are treated as
//! ordinary parameters and chained to the logits through the Gumbel-Softmax
//! Jacobian.

mod attribute;
mod fdcheck;
mod functions;
mod sensitivity;

pub use attribute::AttributeMatrix;
pub use fdcheck::{fd_check, fd_check_logits, random_audit, FdEntry, FdReport};
pub use functions::{AnalysisState, Constraint, Function, Objective};
pub use sensitivity::{gradient_matrix, grad_logits, parameter_gradient, solve_adjoint, Adjoint, PseudoLoad};
