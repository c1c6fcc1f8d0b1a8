use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::Attribute;

/// Attribute matrix of one categorical variable: column `k` holds the
/// attribute vector of choice `k`, rows follow `attributes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeMatrix {
    pub attributes: Vec<Attribute>,
    pub values: DMatrix<f64>,
}

impl AttributeMatrix {
    /// Builds the matrix from per-choice attribute vectors.
    pub fn from_choices(attributes: Vec<Attribute>, choices: &[Vec<f64>]) -> Result<Self> {
        let rows = attributes.len();
        if rows == 0 {
            return Err(Error::Config("attribute matrix needs at least one attribute".into()));
        }
        if choices.len() < 2 {
            return Err(Error::Config("attribute matrix needs at least two choices".into()));
        }
        for (k, c) in choices.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::Config(format!(
                    "choice {} has {} attribute values, expected {}",
                    k + 1,
                    c.len(),
                    rows
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("choice {} has a non-finite attribute", k + 1)));
            }
        }
        let mut seen = attributes.clone();
        seen.sort_by_key(|a| format!("{a:?}"));
        seen.dedup();
        if seen.len() != rows {
            return Err(Error::Config("attribute rows must be distinct".into()));
        }
        let values = DMatrix::from_fn(rows, choices.len(), |r, k| choices[k][r]);
        Ok(Self { attributes, values })
    }

    pub fn n_attributes(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_choices(&self) -> usize {
        self.values.ncols()
    }

    /// Attributes of choice `k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.values.column(k).iter().copied().collect()
    }

    /// `A·s` for a (soft or hard) sample vector `s`.
    pub fn mix(&self, weights: &[f64]) -> Vec<f64> {
        (&self.values * DVector::from_row_slice(weights)).iter().copied().collect()
    }
}
