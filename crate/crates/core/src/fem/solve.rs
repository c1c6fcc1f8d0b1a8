use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::assembly::{Assembly, DofMap};
use crate::error::{Error, Result};

const SLOT_NAMES: [&str; 6] = ["ux", "uy", "uz", "rx", "ry", "rz"];

/// Relative pivot below which the reduced stiffness is treated as singular.
const PIVOT_TOL: f64 = 1e-12;

/// Factorization of the reduced (free-dof) stiffness matrix, kept for the
/// primal solve and every adjoint solve that follows it.
#[derive(Debug, Clone)]
pub struct Factorization {
    chol: Cholesky<f64, Dyn>,
    reduced: DMatrix<f64>,
}

impl Factorization {
    pub fn new(assembly: &Assembly) -> Result<Self> {
        let free = assembly.dofs.free();
        let reduced = assembly.stiffness.select_rows(free).select_columns(free);
        let Some(chol) = Cholesky::new(reduced.clone()) else {
            return Err(Error::Mechanism(mode_report(&reduced, &assembly.dofs)));
        };
        let l = chol.l_dirty();
        for i in 0..reduced.nrows() {
            let pivot = l[(i, i)] * l[(i, i)];
            if !(pivot > PIVOT_TOL * reduced[(i, i)].abs()) {
                return Err(Error::Mechanism(mode_report(&reduced, &assembly.dofs)));
            }
        }
        Ok(Self { chol, reduced })
    }

    /// Solves `K_ff x = rhs` with the stored factors.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }

    pub fn reduced_matrix(&self) -> &DMatrix<f64> {
        &self.reduced
    }

    pub fn dim(&self) -> usize {
        self.reduced.nrows()
    }
}

fn mode_report(reduced: &DMatrix<f64>, dofs: &DofMap) -> String {
    let eig = reduced.clone().symmetric_eigen();
    let (imin, lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let mode = eig.eigenvectors.column(imin);
    let mut ranked: Vec<(usize, f64)> = mode.iter().map(|v| v.abs()).enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let names: Vec<String> = ranked
        .iter()
        .take(4)
        .filter(|(_, v)| *v > 1e-3)
        .map(|(k, _)| {
            let dof = dofs.free()[*k];
            let (node, slot) = dofs_owner(dofs, dof);
            format!("node {} {}", node + 1, SLOT_NAMES[slot])
        })
        .collect();
    format!(
        "reduced stiffness is singular or indefinite (smallest eigenvalue {lmin:.3e}); mode dominated by {}",
        names.join(", ")
    )
}

fn dofs_owner(dofs: &DofMap, dof: usize) -> (usize, usize) {
    let mut node = 0;
    loop {
        for slot in 0..6 {
            if dofs.dof(node, slot) == Some(dof) {
                return (node, slot);
            }
        }
        node += 1;
    }
}

/// Displacements of every load case plus the reusable factorization.
#[derive(Debug, Clone)]
pub struct SolutionState {
    /// Full-length displacement vectors, one per load case.
    pub displacements: Vec<DVector<f64>>,
    pub factorization: Factorization,
}

/// Solves `K u = f` for every load case of the assembly, honoring prescribed
/// displacements on restrained dofs.
pub fn solve(assembly: &Assembly) -> Result<SolutionState> {
    let factorization = Factorization::new(assembly)?;
    let dofs = &assembly.dofs;
    let free = dofs.free();
    let k_fp = if dofs.has_prescribed_motion() {
        let fixed = dofs.fixed();
        let up = DVector::from_iterator(fixed.len(), fixed.iter().map(|&i| dofs.prescribed()[i]));
        Some(assembly.stiffness.select_rows(free).select_columns(fixed) * up)
    } else {
        None
    };
    let mut displacements = Vec::with_capacity(assembly.loads.len());
    for f in &assembly.loads {
        let mut rhs = dofs.restrict_free(f);
        if let Some(kp) = &k_fp {
            rhs -= kp;
        }
        let uf = factorization.solve(&rhs);
        if uf.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("displacement solve produced non-finite values".into()));
        }
        let rhs_norm = rhs.norm();
        if rhs_norm > 0.0 {
            let residual = (factorization.reduced_matrix() * &uf - &rhs).norm();
            if residual >= 1e-8 * rhs_norm {
                return Err(Error::Numerical(format!(
                    "solve residual {:.3e} exceeds tolerance for right-hand side norm {:.3e}",
                    residual, rhs_norm
                )));
            }
        }
        let mut u = dofs.expand_free(&uf);
        for &i in dofs.fixed() {
            u[i] = dofs.prescribed()[i];
        }
        displacements.push(u);
    }
    Ok(SolutionState { displacements, factorization })
}
