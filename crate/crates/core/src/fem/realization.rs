use serde::{Deserialize, Serialize};

use super::model::{ElementKind, FrameModel};

/// Effective properties of one element after design variables are applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementProps {
    pub kind: ElementKind,
    pub area: f64,
    pub iyy: f64,
    pub izz: f64,
    pub torsion_constant: f64,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
    pub yield_stress: f64,
    pub fiber_y: f64,
    pub fiber_z: f64,
    pub roll: f64,
}

impl ElementProps {
    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    pub fn get(&self, attr: Attribute) -> f64 {
        match attr {
            Attribute::Area => self.area,
            Attribute::Iyy => self.iyy,
            Attribute::Izz => self.izz,
            Attribute::TorsionConstant => self.torsion_constant,
            Attribute::MaxFiberDistanceY => self.fiber_y,
            Attribute::MaxFiberDistanceZ => self.fiber_z,
            Attribute::YoungsModulus => self.youngs_modulus,
            Attribute::Density => self.density,
            Attribute::YieldStress => self.yield_stress,
            Attribute::OrientationAngle => self.roll,
        }
    }

    pub fn set(&mut self, attr: Attribute, value: f64) {
        match attr {
            Attribute::Area => self.area = value,
            Attribute::Iyy => self.iyy = value,
            Attribute::Izz => self.izz = value,
            Attribute::TorsionConstant => self.torsion_constant = value,
            Attribute::MaxFiberDistanceY => self.fiber_y = value,
            Attribute::MaxFiberDistanceZ => self.fiber_z = value,
            Attribute::YoungsModulus => self.youngs_modulus = value,
            Attribute::Density => self.density = value,
            Attribute::YieldStress => self.yield_stress = value,
            Attribute::OrientationAngle => self.roll = value,
        }
    }
}

/// Element-level quantity a design variable can drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Area,
    Iyy,
    Izz,
    TorsionConstant,
    MaxFiberDistanceY,
    MaxFiberDistanceZ,
    YoungsModulus,
    Density,
    YieldStress,
    OrientationAngle,
}

impl Attribute {
    /// Stiffness, lumped mass and loads are affine in this attribute with
    /// everything else fixed, so their derivatives are exact differences.
    pub fn is_affine(self) -> bool {
        matches!(
            self,
            Attribute::Area
                | Attribute::Iyy
                | Attribute::Izz
                | Attribute::TorsionConstant
                | Attribute::YoungsModulus
                | Attribute::Density
        )
    }

    /// Stiffness, mass and loads do not depend on this attribute at all.
    pub fn is_response_only(self) -> bool {
        matches!(
            self,
            Attribute::MaxFiberDistanceY | Attribute::MaxFiberDistanceZ | Attribute::YieldStress
        )
    }
}

/// Geometry and element properties of one concrete design.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub positions: Vec<[f64; 3]>,
    pub props: Vec<ElementProps>,
}

impl Realization {
    /// The model as written, with no design variables applied.
    pub fn from_model(model: &FrameModel) -> Self {
        let positions = model.nodes.iter().map(|n| n.position).collect();
        let props = model
            .elements
            .iter()
            .map(|e| {
                let m = &model.materials[e.material];
                let s = &model.sections[e.section];
                ElementProps {
                    kind: e.kind,
                    area: s.area,
                    iyy: s.iyy,
                    izz: s.izz,
                    torsion_constant: s.torsion_constant,
                    youngs_modulus: m.youngs_modulus,
                    poisson_ratio: m.poisson_ratio,
                    density: m.density,
                    yield_stress: m.yield_stress,
                    fiber_y: s.max_fiber_distance_y,
                    fiber_z: s.max_fiber_distance_z,
                    roll: e.orientation_angle,
                }
            })
            .collect();
        Self { positions, props }
    }

    pub fn element_ends(&self, model: &FrameModel, elem: usize) -> ([f64; 3], [f64; 3]) {
        let e = &model.elements[elem];
        (self.positions[e.node_a], self.positions[e.node_b])
    }
}
