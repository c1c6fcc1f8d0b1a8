//! The JSON problem document.
//!
//! Documents use 1-based ids for nodes, elements and load cases, and
//! reference materials and sections by name. [`ProblemDocument::build`]
//! resolves every reference and returns a validated [`StructuralProblem`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::adjoint::{AttributeMatrix, Constraint, Objective};
use crate::design::{CategoricalVariable, ContinuousVariable, DesignSpace};
use crate::error::{Error, Result};
use crate::fem::{
    Attribute, CrossSection, DistributedLoad, Element, ElementKind, FrameModel, LoadCase, Material, Node, Parameter,
    PointLoad, Support, NODE_DOFS,
};
use crate::ga::GaConfig;
use crate::optimizer::{Design, OptimizerConfig, RunRecord};
use crate::problem::StructuralProblem;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dof {
    Ux,
    Uy,
    Uz,
    Rx,
    Ry,
    Rz,
}

impl Dof {
    pub const ALL: [Dof; NODE_DOFS] = [Dof::Ux, Dof::Uy, Dof::Uz, Dof::Rx, Dof::Ry, Dof::Rz];

    pub fn index(self) -> usize {
        Dof::ALL.iter().position(|d| *d == self).expect("listed")
    }

    pub fn translation(axis: Axis) -> Dof {
        Dof::ALL[axis.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: usize,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDoc {
    pub id: usize,
    pub kind: ElementKind,
    pub nodes: [usize; 2],
    pub material: String,
    pub section: String,
    #[serde(default)]
    pub orientation_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrescribedDoc {
    pub dof: Dof,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportDoc {
    pub node: usize,
    pub fixed: Vec<Dof>,
    /// Nonzero imposed displacements; each dof must also be listed in `fixed`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prescribed: Vec<PrescribedDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointLoadDoc {
    pub node: usize,
    pub load: [f64; NODE_DOFS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributedLoadDoc {
    pub element: usize,
    pub load: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadCaseDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub point_loads: Vec<PointLoadDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub distributed_loads: Vec<DistributedLoadDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gravity: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BindingDoc {
    ElementAttribute { attribute: Attribute, elements: Vec<usize> },
    NodeCoordinate { nodes: Vec<usize>, axis: Axis },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousDoc {
    pub name: String,
    pub binding: BindingDoc,
    pub lower: f64,
    pub upper: f64,
    pub initial: f64,
}

/// A categorical choice: either a catalog section (attribute values read from
/// it) or explicit attribute values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceDoc {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoricalDoc {
    pub name: String,
    pub attributes: Vec<Attribute>,
    pub choices: Vec<ChoiceDoc>,
    pub elements: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignDoc {
    #[serde(default)]
    pub continuous: Vec<ContinuousDoc>,
    #[serde(default)]
    pub categorical: Vec<CategoricalDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintDoc {
    Stress { element: usize, load_case: usize },
    /// Stress limits on every element under every load case.
    StressAll,
    Displacement { node: usize, dof: Dof, load_case: usize, limit: f64 },
    Frequency { min_hz: f64 },
    Stretch { node: usize, axis: Axis, load_case: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub nodes: Vec<NodeDoc>,
    pub materials: Vec<Material>,
    pub sections: Vec<CrossSection>,
    pub elements: Vec<ElementDoc>,
    pub supports: Vec<SupportDoc>,
    pub load_cases: Vec<LoadCaseDoc>,
    pub design: DesignDoc,
    pub objective: Objective,
    #[serde(default)]
    pub constraints: Vec<ConstraintDoc>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub ga: GaConfig,
}

fn cfg(msg: String) -> Error {
    Error::Config(msg)
}

/// Converts a 1-based id into an index below `len`.
fn index(id: usize, len: usize, what: &str) -> Result<usize> {
    if id == 0 || id > len {
        return Err(cfg(format!("{what} {id} does not exist (valid ids are 1..={len})")));
    }
    Ok(id - 1)
}

fn section_attribute(s: &CrossSection, a: Attribute) -> Result<f64> {
    Ok(match a {
        Attribute::Area => s.area,
        Attribute::Iyy => s.iyy,
        Attribute::Izz => s.izz,
        Attribute::TorsionConstant => s.torsion_constant,
        Attribute::MaxFiberDistanceY => s.max_fiber_distance_y,
        Attribute::MaxFiberDistanceZ => s.max_fiber_distance_z,
        other => {
            return Err(cfg(format!(
                "attribute {other:?} is not a section property; give explicit values for this choice"
            )))
        }
    })
}

impl ProblemDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(cfg(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn model(&self) -> Result<FrameModel> {
        let n_nodes = self.nodes.len();
        let nodes = self.nodes.iter().map(|n| Node { id: n.id, position: n.position }).collect();
        let materials: HashMap<&str, usize> =
            self.materials.iter().enumerate().map(|(i, m)| (m.name.as_str(), i)).collect();
        let sections: HashMap<&str, usize> =
            self.sections.iter().enumerate().map(|(i, s)| (s.name.as_str(), i)).collect();
        if materials.len() != self.materials.len() || sections.len() != self.sections.len() {
            return Err(cfg("material and section names must be unique".into()));
        }
        let elements = self
            .elements
            .iter()
            .map(|e| {
                Ok(Element {
                    id: e.id,
                    kind: e.kind,
                    node_a: index(e.nodes[0], n_nodes, "node")?,
                    node_b: index(e.nodes[1], n_nodes, "node")?,
                    material: *materials
                        .get(e.material.as_str())
                        .ok_or_else(|| cfg(format!("element {} uses unknown material '{}'", e.id, e.material)))?,
                    section: *sections
                        .get(e.section.as_str())
                        .ok_or_else(|| cfg(format!("element {} uses unknown section '{}'", e.id, e.section)))?,
                    orientation_angle: e.orientation_angle,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n_elem = elements.len();
        let supports = self
            .supports
            .iter()
            .map(|s| {
                let mut sup = Support::new(index(s.node, n_nodes, "support node")?, [false; NODE_DOFS]);
                for d in &s.fixed {
                    sup.fixed[d.index()] = true;
                }
                for p in &s.prescribed {
                    if !sup.fixed[p.dof.index()] {
                        return Err(cfg(format!("node {} prescribes a dof it does not fix", s.node)));
                    }
                    sup.prescribed[p.dof.index()] = p.value;
                }
                Ok(sup)
            })
            .collect::<Result<Vec<_>>>()?;
        let load_cases = self
            .load_cases
            .iter()
            .map(|lc| {
                Ok(LoadCase {
                    name: lc.name.clone(),
                    point_loads: lc
                        .point_loads
                        .iter()
                        .map(|p| Ok(PointLoad { node: index(p.node, n_nodes, "loaded node")?, load: p.load }))
                        .collect::<Result<_>>()?,
                    distributed_loads: lc
                        .distributed_loads
                        .iter()
                        .map(|d| Ok(DistributedLoad { element: index(d.element, n_elem, "loaded element")?, load: d.load }))
                        .collect::<Result<_>>()?,
                    gravity: lc.gravity,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let model = FrameModel {
            nodes,
            materials: self.materials.clone(),
            sections: self.sections.clone(),
            elements,
            supports,
            load_cases,
        };
        model.validate()?;
        Ok(model)
    }

    fn space(&self, model: &FrameModel) -> Result<DesignSpace> {
        let (n_nodes, n_elem) = (model.nodes.len(), model.elements.len());
        let ids = |v: &[usize], len: usize, what: &str| v.iter().map(|&i| index(i, len, what)).collect::<Result<Vec<_>>>();
        let continuous = self
            .design
            .continuous
            .iter()
            .map(|c| {
                let binding = match &c.binding {
                    BindingDoc::ElementAttribute { attribute, elements } => {
                        Parameter::Element { attribute: *attribute, elements: ids(elements, n_elem, "element")? }
                    }
                    BindingDoc::NodeCoordinate { nodes, axis } => {
                        Parameter::NodeCoordinate { nodes: ids(nodes, n_nodes, "node")?, axis: axis.index() }
                    }
                };
                Ok(ContinuousVariable { name: c.name.clone(), binding, lower: c.lower, upper: c.upper, initial: c.initial })
            })
            .collect::<Result<Vec<_>>>()?;
        let sections: HashMap<&str, &CrossSection> = self.sections.iter().map(|s| (s.name.as_str(), s)).collect();
        let categorical = self
            .design
            .categorical
            .iter()
            .map(|c| {
                let columns = c
                    .choices
                    .iter()
                    .map(|ch| match (&ch.section, &ch.values) {
                        (Some(name), None) => {
                            let s = sections
                                .get(name.as_str())
                                .ok_or_else(|| cfg(format!("choice '{}' names unknown section '{name}'", ch.label)))?;
                            c.attributes.iter().map(|&a| section_attribute(s, a)).collect()
                        }
                        (None, Some(v)) => Ok(v.clone()),
                        _ => Err(cfg(format!("choice '{}' needs exactly one of `section` or `values`", ch.label))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                let matrix = AttributeMatrix::from_choices(c.attributes.clone(), &columns)
                    .map_err(|e| cfg(format!("categorical '{}': {e}", c.name)))?;
                Ok(CategoricalVariable {
                    name: c.name.clone(),
                    labels: c.choices.iter().map(|ch| ch.label.clone()).collect(),
                    matrix,
                    elements: ids(&c.elements, n_elem, "element")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let space = DesignSpace { continuous, categorical };
        space.validate(Some(model))?;
        Ok(space)
    }

    fn constraints(&self, model: &FrameModel) -> Result<Vec<Constraint>> {
        let (n_nodes, n_elem, n_lc) = (model.nodes.len(), model.elements.len(), model.load_cases.len());
        let mut out = Vec::new();
        for c in &self.constraints {
            match *c {
                ConstraintDoc::Stress { element, load_case } => out.push(Constraint::Stress {
                    element: index(element, n_elem, "element")?,
                    load_case: index(load_case, n_lc, "load case")?,
                }),
                ConstraintDoc::StressAll => {
                    for load_case in 0..n_lc {
                        for element in 0..n_elem {
                            out.push(Constraint::Stress { element, load_case });
                        }
                    }
                }
                ConstraintDoc::Displacement { node, dof, load_case, limit } => out.push(Constraint::Displacement {
                    node: index(node, n_nodes, "node")?,
                    dof: dof.index(),
                    load_case: index(load_case, n_lc, "load case")?,
                    limit,
                }),
                ConstraintDoc::Frequency { min_hz } => out.push(Constraint::Frequency { min_hz }),
                ConstraintDoc::Stretch { node, axis, load_case } => out.push(Constraint::Stretch {
                    node: index(node, n_nodes, "node")?,
                    axis: axis.index(),
                    load_case: index(load_case, n_lc, "load case")?,
                }),
            }
        }
        Ok(out)
    }

    /// Resolves all references, validates the model, design space and
    /// constraints, and checks that the initial design is not a mechanism.
    pub fn build(&self) -> Result<StructuralProblem> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(cfg(format!("unsupported schema_version {}", self.schema_version)));
        }
        let model = self.model()?;
        let space = self.space(&model)?;
        let constraints = self.constraints(&model)?;
        self.optimizer.validate()?;
        self.ga.validate()?;
        StructuralProblem::new(self.name.clone(), model, space, self.objective, constraints)
    }
}

/// A final design as written next to the run traces. Choices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignDocument {
    pub schema_version: u32,
    pub problem: String,
    pub method: String,
    pub seed: u64,
    pub choices: Vec<usize>,
    pub labels: Vec<String>,
    pub probabilities: Vec<f64>,
    pub x: Vec<f64>,
    pub objective: f64,
    pub max_violation: f64,
    pub feasible: bool,
}

impl DesignDocument {
    /// Checks the design against the problem's design space.
    pub fn validate(&self, problem: &StructuralProblem) -> Result<()> {
        let space = &problem.space;
        if self.schema_version != SCHEMA_VERSION {
            return Err(cfg(format!("unsupported schema_version {}", self.schema_version)));
        }
        if self.choices.len() != space.n_categorical() || self.x.len() != space.n_continuous() {
            return Err(cfg("design does not match the number of design variables".into()));
        }
        for (c, &k) in space.categorical.iter().zip(&self.choices) {
            index(k, c.n_choices(), &format!("choice of '{}'", c.name))?;
        }
        for (v, &x) in space.continuous.iter().zip(&self.x) {
            if !(x >= v.lower && x <= v.upper) {
                return Err(cfg(format!("'{}' = {x} is outside [{}, {}]", v.name, v.lower, v.upper)));
            }
        }
        Ok(())
    }

    pub fn from_run(problem: &StructuralProblem, run: &RunRecord) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            problem: problem.name.clone(),
            method: run.method.to_string(),
            seed: run.seed,
            choices: run.design.choices.iter().map(|k| k + 1).collect(),
            labels: run.design.labels.clone(),
            probabilities: run.design.probabilities.clone(),
            x: run.design.x.clone(),
            objective: run.final_objective,
            max_violation: run.final_max_violation,
            feasible: run.feasible,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("design serializes") + "\n"
    }

    /// Zero-based choices.
    pub fn design(&self) -> Design {
        Design {
            choices: self.choices.iter().map(|k| k - 1).collect(),
            labels: self.labels.clone(),
            probabilities: self.probabilities.clone(),
            x: self.x.clone(),
        }
    }
}
