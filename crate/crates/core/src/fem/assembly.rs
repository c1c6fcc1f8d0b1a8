use nalgebra::{DMatrix, DVector};

use super::element::{self, dof_count};
use super::model::{ElementKind, FrameModel, NODE_DOFS};
use super::realization::Realization;
use crate::error::{Error, Result};

/// Numbering of the active degrees of freedom.
///
/// Every node with an attached element gets three translational dofs;
/// rotational dofs exist only at nodes touched by a beam.
#[derive(Debug, Clone)]
pub struct DofMap {
    node_dofs: Vec<[Option<usize>; NODE_DOFS]>,
    element_dofs: Vec<Vec<usize>>,
    n_dofs: usize,
    free: Vec<usize>,
    fixed: Vec<usize>,
    /// Full-length vector holding prescribed values on fixed dofs.
    prescribed: DVector<f64>,
    /// Position of each dof in the free list.
    free_position: Vec<Option<usize>>,
}

impl DofMap {
    pub fn new(model: &FrameModel) -> Result<Self> {
        let mut translational = vec![false; model.nodes.len()];
        let mut rotational = vec![false; model.nodes.len()];
        for e in &model.elements {
            for n in [e.node_a, e.node_b] {
                translational[n] = true;
                if e.kind == ElementKind::Beam {
                    rotational[n] = true;
                }
            }
        }
        let mut node_dofs = vec![[None; NODE_DOFS]; model.nodes.len()];
        let mut next = 0;
        for (i, slots) in node_dofs.iter_mut().enumerate() {
            for (d, slot) in slots.iter_mut().enumerate() {
                let active = if d < 3 { translational[i] } else { rotational[i] };
                if active {
                    *slot = Some(next);
                    next += 1;
                }
            }
        }
        let element_dofs = model
            .elements
            .iter()
            .map(|e| {
                let per_node = dof_count(e.kind) / 2;
                [e.node_a, e.node_b]
                    .iter()
                    .flat_map(|&n| (0..per_node).map(move |d| (n, d)))
                    .map(|(n, d)| node_dofs[n][d].expect("active dof"))
                    .collect()
            })
            .collect();
        let mut is_fixed = vec![false; next];
        let mut prescribed = DVector::zeros(next);
        for s in &model.supports {
            for d in 0..NODE_DOFS {
                if s.fixed[d] {
                    if let Some(idx) = node_dofs[s.node][d] {
                        is_fixed[idx] = true;
                        prescribed[idx] = s.prescribed[d];
                    }
                }
            }
        }
        let free: Vec<usize> = (0..next).filter(|&i| !is_fixed[i]).collect();
        let fixed: Vec<usize> = (0..next).filter(|&i| is_fixed[i]).collect();
        if free.is_empty() {
            return Err(Error::Model("every degree of freedom is restrained".into()));
        }
        let mut free_position = vec![None; next];
        for (k, &i) in free.iter().enumerate() {
            free_position[i] = Some(k);
        }
        Ok(Self { node_dofs, element_dofs, n_dofs: next, free, fixed, prescribed, free_position })
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn dof(&self, node: usize, slot: usize) -> Option<usize> {
        self.node_dofs[node][slot]
    }

    pub fn element_dofs(&self, elem: usize) -> &[usize] {
        &self.element_dofs[elem]
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn fixed(&self) -> &[usize] {
        &self.fixed
    }

    pub fn free_position(&self, dof: usize) -> Option<usize> {
        self.free_position[dof]
    }

    pub fn prescribed(&self) -> &DVector<f64> {
        &self.prescribed
    }

    pub fn has_prescribed_motion(&self) -> bool {
        self.fixed.iter().any(|&i| self.prescribed[i] != 0.0)
    }

    /// Gathers the element-dof entries of a full-length vector.
    pub fn gather(&self, elem: usize, full: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.element_dofs[elem].len(), self.element_dofs[elem].iter().map(|&i| full[i]))
    }

    pub fn restrict_free(&self, full: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.free.len(), self.free.iter().map(|&i| full[i]))
    }

    pub fn expand_free(&self, reduced: &DVector<f64>) -> DVector<f64> {
        let mut full = DVector::zeros(self.n_dofs);
        for (k, &i) in self.free.iter().enumerate() {
            full[i] = reduced[k];
        }
        full
    }
}

/// Global stiffness, load vectors and lumped mass of one realization.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub dofs: DofMap,
    pub stiffness: DMatrix<f64>,
    pub loads: Vec<DVector<f64>>,
}

/// Equivalent nodal loads one element contributes to a load case
/// (distributed loads plus gravity), in element dof order.
pub fn element_load(
    model: &FrameModel,
    real: &Realization,
    elem: usize,
    load_case: usize,
) -> Result<DVector<f64>> {
    let p = &real.props[elem];
    let (pa, pb) = real.element_ends(model, elem);
    let lc = &model.load_cases[load_case];
    let mut f = DVector::zeros(dof_count(p.kind));
    for d in lc.distributed_loads.iter().filter(|d| d.element == elem) {
        f += element::distributed_load_vector(p, pa, pb, d.load)?;
    }
    if let Some(g) = lc.gravity {
        f += element::gravity_load_vector(p, pa, pb, g);
    }
    Ok(f)
}

/// Assembles K and one load vector per load case.
pub fn assemble(model: &FrameModel, real: &Realization) -> Result<Assembly> {
    let dofs = DofMap::new(model)?;
    let n = dofs.n_dofs();
    let mut stiffness = DMatrix::zeros(n, n);
    for (i, p) in real.props.iter().enumerate() {
        let (pa, pb) = real.element_ends(model, i);
        let ke = element::element_stiffness(p, pa, pb)?;
        scatter_matrix(&mut stiffness, dofs.element_dofs(i), &ke);
    }
    let mut loads = Vec::with_capacity(model.load_cases.len());
    for (c, lc) in model.load_cases.iter().enumerate() {
        let mut f = DVector::zeros(n);
        for pl in &lc.point_loads {
            for (d, v) in pl.load.iter().enumerate() {
                if *v == 0.0 {
                    continue;
                }
                let idx = dofs.dof(pl.node, d).ok_or_else(|| {
                    Error::Model(format!(
                        "load case '{}' applies a load on inactive dof {d} of node {}",
                        lc.name,
                        pl.node + 1
                    ))
                })?;
                f[idx] += v;
            }
        }
        if lc.gravity.is_some() || !lc.distributed_loads.is_empty() {
            for i in 0..model.elements.len() {
                let fe = element_load(model, real, i, c)?;
                scatter_vector(&mut f, dofs.element_dofs(i), &fe);
            }
        }
        loads.push(f);
    }
    Ok(Assembly { dofs, stiffness, loads })
}

/// Diagonal of the lumped (translational) mass matrix.
pub fn lumped_mass(model: &FrameModel, real: &Realization, dofs: &DofMap) -> DVector<f64> {
    let mut m = DVector::zeros(dofs.n_dofs());
    for (i, p) in real.props.iter().enumerate() {
        let (pa, pb) = real.element_ends(model, i);
        scatter_vector(&mut m, dofs.element_dofs(i), &element::lumped_mass_diagonal(p, pa, pb));
    }
    m
}

pub(crate) fn scatter_matrix(global: &mut DMatrix<f64>, idx: &[usize], local: &DMatrix<f64>) {
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            global[(i, j)] += local[(a, b)];
        }
    }
}

pub(crate) fn scatter_vector(global: &mut DVector<f64>, idx: &[usize], local: &DVector<f64>) {
    for (a, &i) in idx.iter().enumerate() {
        global[i] += local[a];
    }
}
