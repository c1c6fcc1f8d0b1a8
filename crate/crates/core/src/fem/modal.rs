//! Smallest natural frequency by block inverse (subspace) iteration.
//!
//! Each sweep applies `K⁻¹M` with the stored stiffness factors and then
//! performs a Rayleigh-Ritz projection, so the lowest pair and the gap to the
//! next eigenvalue come out together.

use nalgebra::{DMatrix, DVector};

use super::assembly::Assembly;
use super::solve::Factorization;
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 2000;
const BLOCK: usize = 4;

#[derive(Debug, Clone)]
pub struct Modal {
    /// Smallest generalized eigenvalue of `(K, M)`, i.e. ω².
    pub eigenvalue: f64,
    /// Second-smallest Ritz value, when the block holds more than one vector.
    pub next_eigenvalue: Option<f64>,
    /// Mass-normalized mode shape, full dof length (zeros on restrained dofs).
    pub mode: DVector<f64>,
    pub iterations: usize,
}

impl Modal {
    pub fn frequency_hz(&self) -> f64 {
        self.eigenvalue.sqrt() / (2.0 * std::f64::consts::PI)
    }

    /// Relative gap between the two lowest eigenvalues.
    pub fn relative_gap(&self) -> Option<f64> {
        self.next_eigenvalue.map(|l2| (l2 - self.eigenvalue) / self.eigenvalue)
    }
}

/// Lowest eigenpair of `K φ = λ M φ` with `M` the lumped mass diagonal
/// (full dof length).
pub fn smallest_mode(assembly: &Assembly, factor: &Factorization, mass: &DVector<f64>) -> Result<Modal> {
    let dofs = &assembly.dofs;
    let m = dofs.restrict_free(mass);
    let n = m.len();
    let massive = m.iter().filter(|v| **v > 0.0).count();
    if massive == 0 {
        return Err(Error::Numerical("no free degree of freedom carries mass".into()));
    }
    let q = BLOCK.min(massive).min(n);
    let mut x = DMatrix::from_fn(n, q, |i, j| {
        if j == 0 {
            1.0
        } else {
            ((i + 1) as f64 * (0.618_033_988_7 * (j as f64) + 0.1)).sin() + 0.1 * j as f64
        }
    });
    let mut last = (f64::NAN, f64::NAN);
    let mut last_residual = f64::INFINITY;
    let mut stagnant = 0;
    for it in 1..=MAX_ITERATIONS {
        let mut mx = x.clone();
        for mut col in mx.column_iter_mut() {
            col.component_mul_assign(&m);
        }
        let mut y = DMatrix::zeros(n, q);
        for j in 0..q {
            y.set_column(j, &factor.solve(&mx.column(j).into_owned()));
        }
        // M-norm residual of the previous lowest Ritz pair, ‖λ·K⁻¹Mx − x‖/‖x‖
        let residual = if it > 1 {
            let x0 = x.column(0);
            let r = y.column(0) * last.0 - x0;
            (r.component_mul(&m).dot(&r) / x0.component_mul(&m).dot(&x0)).sqrt()
        } else {
            f64::INFINITY
        };
        stagnant = if residual > 0.5 * last_residual { stagnant + 1 } else { 0 };
        last_residual = residual;

        let kr = y.transpose() * &mx;
        let kr = (&kr + kr.transpose()) * 0.5;
        let mut my = y.clone();
        for mut col in my.column_iter_mut() {
            col.component_mul_assign(&m);
        }
        let mr = y.transpose() * &my;
        let mr = (&mr + mr.transpose()) * 0.5;

        let me = mr.symmetric_eigen();
        let mu_max = me.eigenvalues.amax();
        let keep: Vec<usize> = (0..q).filter(|&i| me.eigenvalues[i] > 1e-12 * mu_max).collect();
        if keep.is_empty() {
            return Err(Error::Numerical("subspace iteration lost its mass-weighted basis".into()));
        }
        let basis = DMatrix::from_fn(q, keep.len(), |i, k| {
            me.eigenvectors[(i, keep[k])] / me.eigenvalues[keep[k]].sqrt()
        });
        let c = basis.transpose() * kr * &basis;
        let ce = ((&c + c.transpose()) * 0.5).symmetric_eigen();
        let mut order: Vec<usize> = (0..keep.len()).collect();
        order.sort_by(|a, b| ce.eigenvalues[*a].total_cmp(&ce.eigenvalues[*b]));
        let w = DMatrix::from_fn(keep.len(), keep.len(), |i, k| ce.eigenvectors[(i, order[k])]);
        let ritz: Vec<f64> = order.iter().map(|&k| ce.eigenvalues[k]).collect();
        let new_x = &y * &basis * w;
        // pad back to the block size if the basis shrank
        x = if new_x.ncols() == q {
            new_x
        } else {
            let mut padded = x.clone();
            padded.view_mut((0, 0), (n, new_x.ncols())).copy_from(&new_x);
            padded
        };

        let l1 = ritz[0];
        let l2 = ritz.get(1).copied().unwrap_or(f64::NAN);
        if !(l1 > 0.0) || !l1.is_finite() {
            return Err(Error::Numerical(format!("non-positive Ritz value {l1}")));
        }
        // a tight vector residual, or the eigenvalue settled at round-off
        let conv1 = residual <= 1e-9 || (stagnant >= 5 && (l1 - last.0).abs() <= 1e-12 * l1);
        let conv2 = ritz.len() < 2 || (l2 - last.1).abs() <= 1e-9 * l2;
        last = (l1, l2);
        if it > 1 && conv1 && conv2 {
            let phi = x.column(0).into_owned();
            let norm = phi.component_mul(&m).dot(&phi).sqrt();
            return Ok(Modal {
                eigenvalue: l1,
                next_eigenvalue: if ritz.len() > 1 { Some(l2) } else { None },
                mode: dofs.expand_free(&(phi / norm)),
                iterations: it,
            });
        }
    }
    Err(Error::Numerical(format!(
        "inverse iteration did not converge within {MAX_ITERATIONS} sweeps"
    )))
}
