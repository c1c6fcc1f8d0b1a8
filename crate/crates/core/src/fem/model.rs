use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of degree-of-freedom slots per node: three translations, three rotations.
pub const NODE_DOFS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
    pub yield_stress: f64,
}

impl Material {
    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    fn validate(&self) -> Result<()> {
        let ok = self.youngs_modulus > 0.0
            && self.poisson_ratio > -1.0
            && self.poisson_ratio < 0.5
            && self.density >= 0.0
            && self.yield_stress > 0.0;
        if !ok {
            return Err(Error::Model(format!("material '{}' has invalid properties", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub name: String,
    pub area: f64,
    pub iyy: f64,
    pub izz: f64,
    pub torsion_constant: f64,
    pub max_fiber_distance_y: f64,
    pub max_fiber_distance_z: f64,
}

impl CrossSection {
    /// A section for axial-only members; bending properties are placeholders.
    pub fn truss(name: &str, area: f64) -> Self {
        Self {
            name: name.to_string(),
            area,
            iyy: 1.0,
            izz: 1.0,
            torsion_constant: 1.0,
            max_fiber_distance_y: 1.0,
            max_fiber_distance_z: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let vals = [
            self.area,
            self.iyy,
            self.izz,
            self.torsion_constant,
            self.max_fiber_distance_y,
            self.max_fiber_distance_z,
        ];
        if vals.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Model(format!("section '{}' has non-positive properties", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Truss,
    Beam,
}

/// A two-node element. `node_a`, `node_b`, `material` and `section` are
/// zero-based indices into the owning model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub id: usize,
    pub kind: ElementKind,
    pub node_a: usize,
    pub node_b: usize,
    pub material: usize,
    pub section: usize,
    /// Roll of the cross-section about the element axis, radians.
    pub orientation_angle: f64,
}

/// Restrained dofs of one node. A restrained dof takes the matching
/// `prescribed` value (zero for an ordinary support).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub node: usize,
    pub fixed: [bool; NODE_DOFS],
    pub prescribed: [f64; NODE_DOFS],
}

impl Support {
    pub fn new(node: usize, fixed: [bool; NODE_DOFS]) -> Self {
        Self { node, fixed, prescribed: [0.0; NODE_DOFS] }
    }

    pub fn clamped(node: usize) -> Self {
        Self::new(node, [true; NODE_DOFS])
    }

    pub fn pinned(node: usize) -> Self {
        Self::new(node, [true, true, true, false, false, false])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointLoad {
    pub node: usize,
    /// Forces then moments, global axes.
    pub load: [f64; NODE_DOFS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributedLoad {
    pub element: usize,
    /// Force per unit length, global axes.
    pub load: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LoadCase {
    pub name: String,
    pub point_loads: Vec<PointLoad>,
    pub distributed_loads: Vec<DistributedLoad>,
    pub gravity: Option<[f64; 3]>,
}

/// Immutable description of a structure: geometry, properties, supports, loads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameModel {
    pub nodes: Vec<Node>,
    pub materials: Vec<Material>,
    pub sections: Vec<CrossSection>,
    pub elements: Vec<Element>,
    pub supports: Vec<Support>,
    pub load_cases: Vec<LoadCase>,
}

impl FrameModel {
    /// Checks ids, references and element lengths.
    pub fn validate(&self) -> Result<()> {
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i + 1 {
                return Err(Error::Model(format!("node ids must be contiguous from 1, found {} at position {}", n.id, i + 1)));
            }
            if n.position.iter().any(|c| !c.is_finite()) {
                return Err(Error::Model(format!("node {} has a non-finite coordinate", n.id)));
            }
        }
        for m in &self.materials {
            m.validate()?;
        }
        for s in &self.sections {
            s.validate()?;
        }
        if self.elements.is_empty() {
            return Err(Error::Model("model has no elements".into()));
        }
        for (i, e) in self.elements.iter().enumerate() {
            if e.id != i + 1 {
                return Err(Error::Model(format!("element ids must be contiguous from 1, found {} at position {}", e.id, i + 1)));
            }
            if e.node_a >= self.nodes.len() || e.node_b >= self.nodes.len() {
                return Err(Error::Model(format!("element {} references a missing node", e.id)));
            }
            if e.node_a == e.node_b {
                return Err(Error::Model(format!("element {} connects a node to itself", e.id)));
            }
            if e.material >= self.materials.len() || e.section >= self.sections.len() {
                return Err(Error::Model(format!("element {} references a missing material or section", e.id)));
            }
            let (a, b) = (self.nodes[e.node_a].position, self.nodes[e.node_b].position);
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2) + (b[2] - a[2]).powi(2)).sqrt();
            if !(len > 0.0) {
                return Err(Error::Model(format!("element {} has zero length", e.id)));
            }
        }
        for s in &self.supports {
            if s.node >= self.nodes.len() {
                return Err(Error::Model(format!("support references missing node index {}", s.node)));
            }
        }
        for lc in &self.load_cases {
            for p in &lc.point_loads {
                if p.node >= self.nodes.len() {
                    return Err(Error::Model(format!("load case '{}' loads a missing node", lc.name)));
                }
            }
            for d in &lc.distributed_loads {
                if d.element >= self.elements.len() {
                    return Err(Error::Model(format!("load case '{}' loads a missing element", lc.name)));
                }
            }
        }
        Ok(())
    }

    /// Element indices attached to each node.
    pub fn node_elements(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.elements.iter().enumerate() {
            out[e.node_a].push(i);
            out[e.node_b].push(i);
        }
        out
    }
}
