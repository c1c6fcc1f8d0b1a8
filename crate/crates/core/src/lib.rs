//! Gradient-based optimization of truss and frame structures with mixed
//! categorical and continuous design variables.
//!
//! Categorical choices (cross-section profiles, materials) are optimized
//! through logits sampled with the straight-through Gumbel-Softmax; structural
//! responses are differentiated with the adjoint method so every iteration
//! needs a single finite-element solve.

// `!(x > 0.0)` rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adjoint;
pub mod bench;
pub mod design;
pub mod error;
pub mod fem;
pub mod ga;
pub mod gsm;
pub mod optimizer;
pub mod problem;

pub use error::{Error, Result};
