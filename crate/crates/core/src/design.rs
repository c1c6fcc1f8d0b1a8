//! Design variables and how they bind to the structural model.

use serde::{Deserialize, Serialize};

use crate::adjoint::AttributeMatrix;
use crate::error::{Error, Result};
use crate::fem::{FrameModel, Parameter, Realization};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousVariable {
    pub name: String,
    pub binding: Parameter,
    pub lower: f64,
    pub upper: f64,
    pub initial: f64,
}

/// A categorical variable: its choices, their attributes, and the element
/// group whose attributes it sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalVariable {
    pub name: String,
    pub labels: Vec<String>,
    pub matrix: AttributeMatrix,
    pub elements: Vec<usize>,
}

impl CategoricalVariable {
    pub fn n_choices(&self) -> usize {
        self.matrix.n_choices()
    }

    /// One model parameter per attribute row.
    pub fn parameters(&self) -> Vec<Parameter> {
        self.matrix
            .attributes
            .iter()
            .map(|&attribute| Parameter::Element { attribute, elements: self.elements.clone() })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DesignSpace {
    pub continuous: Vec<ContinuousVariable>,
    pub categorical: Vec<CategoricalVariable>,
}

impl DesignSpace {
    pub fn n_continuous(&self) -> usize {
        self.continuous.len()
    }

    pub fn n_categorical(&self) -> usize {
        self.categorical.len()
    }

    /// Total count of design variables (continuous plus categorical).
    pub fn n_variables(&self) -> usize {
        self.continuous.len() + self.categorical.len()
    }

    /// Checks bounds and attribute matrices, and bindings when a model is given.
    pub fn validate(&self, model: Option<&FrameModel>) -> Result<()> {
        for v in &self.continuous {
            if !(v.lower <= v.upper) || !v.lower.is_finite() || !v.upper.is_finite() {
                return Err(Error::Config(format!("variable '{}' has invalid bounds", v.name)));
            }
            if !(v.initial >= v.lower && v.initial <= v.upper) {
                return Err(Error::Config(format!("variable '{}' starts outside its bounds", v.name)));
            }
            if let Some(m) = model {
                v.binding.validate(m)?;
            }
        }
        for c in &self.categorical {
            if c.labels.len() != c.n_choices() {
                return Err(Error::Config(format!(
                    "categorical '{}' has {} labels for {} choices",
                    c.name,
                    c.labels.len(),
                    c.n_choices()
                )));
            }
            if let Some(m) = model {
                for p in c.parameters() {
                    p.validate(m)?;
                }
            }
        }
        Ok(())
    }

    pub fn initial_x(&self) -> Vec<f64> {
        self.continuous.iter().map(|v| v.initial).collect()
    }

    /// Maps `x` onto `[0, 1]` per variable bounds (degenerate bounds map to 0).
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        self.continuous
            .iter()
            .zip(x)
            .map(|(v, &xi)| {
                let w = v.upper - v.lower;
                if w > 0.0 {
                    (xi - v.lower) / w
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        self.continuous.iter().zip(z).map(|(v, &zi)| v.lower + zi * (v.upper - v.lower)).collect()
    }

    /// Attribute vectors of the given choices.
    pub fn hard_attributes(&self, choices: &[usize]) -> Vec<Vec<f64>> {
        self.categorical.iter().zip(choices).map(|(c, &k)| c.matrix.column(k)).collect()
    }

    /// Applies categorical attributes and then continuous values to the model.
    pub fn realize(&self, model: &FrameModel, attributes: &[Vec<f64>], x: &[f64]) -> Result<Realization> {
        if attributes.len() != self.categorical.len() || x.len() != self.continuous.len() {
            return Err(Error::Config(format!(
                "design has {} categorical and {} continuous values, space expects {} and {}",
                attributes.len(),
                x.len(),
                self.categorical.len(),
                self.continuous.len()
            )));
        }
        let mut real = Realization::from_model(model);
        for (c, a) in self.categorical.iter().zip(attributes) {
            if a.len() != c.matrix.n_attributes() {
                return Err(Error::Config(format!("categorical '{}' got {} attribute values", c.name, a.len())));
            }
            for (p, &v) in c.parameters().iter().zip(a) {
                p.apply(&mut real, v);
            }
        }
        for (v, &xi) in self.continuous.iter().zip(x) {
            v.binding.apply(&mut real, xi);
        }
        Ok(real)
    }
}
