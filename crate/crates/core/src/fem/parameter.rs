use serde::{Deserialize, Serialize};

use super::model::FrameModel;
use super::realization::{Attribute, Realization};
use crate::error::{Error, Result};

/// A model quantity driven by a design variable. Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Parameter {
    /// One attribute shared by a group of elements.
    Element { attribute: Attribute, elements: Vec<usize> },
    /// One coordinate (`axis` 0..3) shared by a set of nodes.
    NodeCoordinate { nodes: Vec<usize>, axis: usize },
}

impl Parameter {
    pub fn validate(&self, model: &FrameModel) -> Result<()> {
        match self {
            Parameter::Element { elements, .. } => {
                if elements.is_empty() {
                    return Err(Error::Config("element binding targets no elements".into()));
                }
                if let Some(e) = elements.iter().find(|&&e| e >= model.elements.len()) {
                    return Err(Error::Config(format!("binding targets missing element index {e}")));
                }
            }
            Parameter::NodeCoordinate { nodes, axis } => {
                if nodes.is_empty() || *axis > 2 {
                    return Err(Error::Config("node binding needs nodes and an axis in 0..3".into()));
                }
                if let Some(n) = nodes.iter().find(|&&n| n >= model.nodes.len()) {
                    return Err(Error::Config(format!("binding targets missing node index {n}")));
                }
            }
        }
        Ok(())
    }

    /// Current value (taken from the first target).
    pub fn value(&self, real: &Realization) -> f64 {
        match self {
            Parameter::Element { attribute, elements } => real.props[elements[0]].get(*attribute),
            Parameter::NodeCoordinate { nodes, axis } => real.positions[nodes[0]][*axis],
        }
    }

    pub fn apply(&self, real: &mut Realization, value: f64) {
        match self {
            Parameter::Element { attribute, elements } => {
                for &e in elements {
                    real.props[e].set(*attribute, value);
                }
            }
            Parameter::NodeCoordinate { nodes, axis } => {
                for &n in nodes {
                    real.positions[n][*axis] = value;
                }
            }
        }
    }

    /// Elements whose stiffness, mass or loads may change with this parameter.
    pub fn affected_elements(&self, model: &FrameModel) -> Vec<usize> {
        match self {
            Parameter::Element { elements, .. } => {
                let mut v = elements.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
            Parameter::NodeCoordinate { nodes, .. } => {
                let mut v: Vec<usize> = model
                    .elements
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| nodes.contains(&e.node_a) || nodes.contains(&e.node_b))
                    .map(|(i, _)| i)
                    .collect();
                v.dedup();
                v
            }
        }
    }

    /// True when K, M and f are affine in this parameter.
    pub fn is_affine(&self) -> bool {
        matches!(self, Parameter::Element { attribute, .. } if attribute.is_affine())
    }

    /// True when K, M and f do not depend on this parameter.
    pub fn is_response_only(&self) -> bool {
        matches!(self, Parameter::Element { attribute, .. } if attribute.is_response_only())
    }

    /// Central-difference step at `value`: relative for section and material
    /// attributes, whose magnitudes span many decades across unit systems,
    /// and [`fd_step`] for geometry.
    pub fn fd_step(&self, value: f64) -> f64 {
        match self {
            Parameter::Element { attribute, .. } if *attribute != Attribute::OrientationAngle && value != 0.0 => {
                1e-6 * value.abs()
            }
            _ => fd_step(value),
        }
    }

    pub fn targets_node(&self, node: usize, axis_of_interest: usize) -> bool {
        matches!(self, Parameter::NodeCoordinate { nodes, axis } if *axis == axis_of_interest && nodes.contains(&node))
    }
}

/// Central-difference step used for parameters without an analytic derivative.
pub fn fd_step(value: f64) -> f64 {
    1e-6 * value.abs().max(1.0)
}
