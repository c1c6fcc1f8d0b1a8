//! Small structures shared by the integration tests.
#![allow(dead_code)]

use frameopt::adjoint::{AttributeMatrix, Constraint, Objective};
use frameopt::bench::{rectangle, solid_circle, tube};
use frameopt::design::{CategoricalVariable, ContinuousVariable, DesignSpace};
use frameopt::fem::{
    Attribute, CrossSection, Element, ElementKind, FrameModel, LoadCase, Material, Node, Parameter, PointLoad, Support,
};
use frameopt::problem::StructuralProblem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn steel() -> Material {
    Material { name: "steel".into(), youngs_modulus: 210e9, poisson_ratio: 0.3, density: 7850.0, yield_stress: 250e6 }
}

pub fn unit_material() -> Material {
    Material { name: "unit".into(), youngs_modulus: 1.0, poisson_ratio: 0.25, density: 1.0, yield_stress: 1.0 }
}

fn element(id: usize, kind: ElementKind, a: usize, b: usize, section: usize) -> Element {
    Element { id, kind, node_a: a, node_b: b, material: 0, section, orientation_angle: 0.0 }
}

/// `n` beam elements along X from a clamped root, tip force `load` (six
/// components) at the free end.
pub fn cantilever(n: usize, length: f64, material: Material, section: CrossSection, load: [f64; 6]) -> FrameModel {
    let nodes = (0..=n).map(|i| Node { id: i + 1, position: [length * i as f64 / n as f64, 0.0, 0.0] }).collect();
    let elements = (0..n).map(|i| element(i + 1, ElementKind::Beam, i, i + 1, 0)).collect();
    FrameModel {
        nodes,
        materials: vec![material],
        sections: vec![section],
        elements,
        supports: vec![Support::clamped(0)],
        load_cases: vec![LoadCase {
            name: "tip".into(),
            point_loads: vec![PointLoad { node: n, load }],
            ..Default::default()
        }],
    }
}

/// Two bars from supports at `(±b, 0, 0)` to an apex at `(0, 0, h)`, loaded
/// by `p` straight down at the apex. Out-of-plane motion of the apex is held.
pub fn two_bar(b: f64, h: f64, area: f64, p: f64) -> FrameModel {
    FrameModel {
        nodes: vec![
            Node { id: 1, position: [-b, 0.0, 0.0] },
            Node { id: 2, position: [b, 0.0, 0.0] },
            Node { id: 3, position: [0.0, 0.0, h] },
        ],
        materials: vec![Material { name: "m".into(), youngs_modulus: 1e4, poisson_ratio: 0.3, density: 2.0, yield_stress: 50.0 }],
        sections: vec![CrossSection::truss("bar", area)],
        elements: vec![element(1, ElementKind::Truss, 0, 2, 0), element(2, ElementKind::Truss, 1, 2, 0)],
        supports: vec![
            Support::pinned(0),
            Support::pinned(1),
            Support::new(2, [false, true, false, false, false, false]),
        ],
        load_cases: vec![LoadCase {
            name: "apex".into(),
            point_loads: vec![PointLoad { node: 2, load: [0.0, 0.0, -p, 0.0, 0.0, 0.0] }],
            ..Default::default()
        }],
    }
}

fn section_row(s: &CrossSection) -> Vec<f64> {
    vec![s.area, s.iyy, s.izz, s.torsion_constant, s.max_fiber_distance_y, s.max_fiber_distance_z]
}

pub const SECTION_ATTRIBUTES: [Attribute; 6] = [
    Attribute::Area,
    Attribute::Iyy,
    Attribute::Izz,
    Attribute::TorsionConstant,
    Attribute::MaxFiberDistanceY,
    Attribute::MaxFiberDistanceZ,
];

fn section_matrix(sections: &[CrossSection]) -> AttributeMatrix {
    let rows: Vec<Vec<f64>> = sections.iter().map(section_row).collect();
    AttributeMatrix::from_choices(SECTION_ATTRIBUTES.to_vec(), &rows).unwrap()
}

/// A ten-element space frame (four columns, four top beams, two braces)
/// with jittered geometry and loads drawn from `seed`.
///
/// Continuous variables: two top-node coordinates and the roll of the top
/// beams. Categorical: the column section (three choices, six attributes)
/// and the top-beam section together with its material (three choices,
/// nine attributes).
pub fn random_frame(seed: u64, objective: Objective) -> StructuralProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jitter = |s: f64| rng.random_range(-s..s);
    let corners = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.5], [0.0, 1.5]];
    let mut nodes = Vec::new();
    for (i, c) in corners.iter().enumerate() {
        nodes.push(Node { id: i + 1, position: [c[0] + jitter(0.2), c[1] + jitter(0.2), 0.0] });
    }
    for (i, c) in corners.iter().enumerate() {
        nodes.push(Node { id: i + 5, position: [c[0] + jitter(0.2), c[1] + jitter(0.2), 3.0 + jitter(0.3)] });
    }
    let sections = vec![rectangle("r", 0.12, 0.08), tube("t", 0.06, 0.005), solid_circle("c", 0.04)];
    let mut elements = Vec::new();
    for i in 0..4 {
        elements.push(element(i + 1, ElementKind::Beam, i, i + 4, 0));
    }
    for i in 0..4 {
        elements.push(element(i + 5, ElementKind::Beam, 4 + i, 4 + (i + 1) % 4, 1));
    }
    elements.push(element(9, ElementKind::Beam, 0, 5, 2));
    elements.push(element(10, ElementKind::Beam, 3, 6, 2));
    for e in &mut elements {
        e.orientation_angle = jitter(0.5);
    }
    let mut load = |n: usize| PointLoad {
        node: n,
        load: [jitter(20e3), jitter(20e3), -10e3 + jitter(5e3), jitter(1e3), jitter(1e3), jitter(1e3)],
    };
    let load_cases = vec![
        LoadCase {
            name: "wind".into(),
            point_loads: vec![load(4), load(6)],
            distributed_loads: vec![frameopt::fem::DistributedLoad { element: 4, load: [0.0, 0.0, -5e3] }],
            gravity: Some([0.0, 0.0, -9.81]),
        },
        LoadCase { name: "snow".into(), point_loads: vec![load(5), load(7)], ..Default::default() },
    ];
    let model = FrameModel {
        nodes,
        materials: vec![steel()],
        sections: sections.clone(),
        elements,
        supports: (0..4).map(Support::clamped).collect(),
        load_cases,
    };

    let x5 = model.nodes[5].position[0];
    let z6 = model.nodes[6].position[2];
    let continuous = vec![
        ContinuousVariable {
            name: "x6".into(),
            binding: Parameter::NodeCoordinate { nodes: vec![5], axis: 0 },
            lower: x5 - 0.3,
            upper: x5 + 0.3,
            initial: x5,
        },
        ContinuousVariable {
            name: "z7".into(),
            binding: Parameter::NodeCoordinate { nodes: vec![6], axis: 2 },
            lower: z6 - 0.3,
            upper: z6 + 0.3,
            initial: z6,
        },
        ContinuousVariable {
            name: "roll".into(),
            binding: Parameter::Element { attribute: Attribute::OrientationAngle, elements: vec![4, 5, 6, 7] },
            lower: -1.0,
            upper: 1.0,
            initial: 0.0,
        },
    ];
    let columns = CategoricalVariable {
        name: "columns".into(),
        labels: vec!["rect".into(), "tube".into(), "circle".into()],
        matrix: section_matrix(&[rectangle("a", 0.15, 0.1), tube("b", 0.08, 0.006), solid_circle("c", 0.06)]),
        elements: vec![0, 1, 2, 3],
    };
    let beam_choices = [
        (rectangle("a", 0.14, 0.07), [210e9, 7850.0, 250e6]),
        (tube("b", 0.07, 0.004), [70e9, 2700.0, 150e6]),
        (rectangle("c", 0.1, 0.1), [200e9, 8000.0, 300e6]),
    ];
    let mut beam_attrs = SECTION_ATTRIBUTES.to_vec();
    beam_attrs.extend([Attribute::YoungsModulus, Attribute::Density, Attribute::YieldStress]);
    let beam_rows: Vec<Vec<f64>> = beam_choices
        .iter()
        .map(|(s, m)| {
            let mut r = section_row(s);
            r.extend(m);
            r
        })
        .collect();
    let beams = CategoricalVariable {
        name: "beams".into(),
        labels: vec!["steel rect".into(), "alu tube".into(), "steel box".into()],
        matrix: AttributeMatrix::from_choices(beam_attrs, &beam_rows).unwrap(),
        elements: vec![4, 5, 6, 7],
    };
    let space = DesignSpace { continuous, categorical: vec![columns, beams] };
    let constraints = vec![
        Constraint::Displacement { node: 5, dof: 0, load_case: 0, limit: 0.01 },
        Constraint::Displacement { node: 7, dof: 2, load_case: 1, limit: 0.01 },
        Constraint::Stress { element: 0, load_case: 0 },
        Constraint::Stress { element: 5, load_case: 0 },
        Constraint::Stress { element: 8, load_case: 1 },
    ];
    StructuralProblem::new(format!("frame{seed}"), model, space, objective, constraints).unwrap()
}

/// One truss bar of length 1 with a tip load, sized by a categorical variable
/// with the given areas. Minimizes mass subject to a tip displacement limit.
pub fn sized_bar(areas: &[f64], limit: f64) -> StructuralProblem {
    let model = FrameModel {
        nodes: vec![Node { id: 1, position: [0.0; 3] }, Node { id: 2, position: [1.0, 0.0, 0.0] }],
        materials: vec![unit_material()],
        sections: vec![CrossSection::truss("bar", areas[0])],
        elements: vec![element(1, ElementKind::Truss, 0, 1, 0)],
        supports: vec![Support::pinned(0), Support::new(1, [false, true, true, false, false, false])],
        load_cases: vec![LoadCase {
            name: "pull".into(),
            point_loads: vec![PointLoad { node: 1, load: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0] }],
            ..Default::default()
        }],
    };
    let rows: Vec<Vec<f64>> = areas.iter().map(|&a| vec![a]).collect();
    let var = CategoricalVariable {
        name: "area".into(),
        labels: areas.iter().map(|a| format!("A={a}")).collect(),
        matrix: AttributeMatrix::from_choices(vec![Attribute::Area], &rows).unwrap(),
        elements: vec![0],
    };
    let space = DesignSpace { continuous: vec![], categorical: vec![var] };
    let constraints = vec![Constraint::Displacement { node: 1, dof: 0, load_case: 0, limit }];
    StructuralProblem::new("bar", model, space, Objective::Mass, constraints).unwrap()
}

/// Two independent bars (the two-bar truss with one categorical variable per
/// bar), each choosing among `areas`, minimizing mass under stress limits.
pub fn enumerable_two_bar(areas: &[f64], yield_stress: f64, density: f64) -> StructuralProblem {
    let mut model = two_bar(3.0, 4.0, areas[0], 100.0);
    model.materials[0].yield_stress = yield_stress;
    model.materials[0].density = density;
    let rows: Vec<Vec<f64>> = areas.iter().map(|&a| vec![a]).collect();
    let var = |name: &str, e: usize| CategoricalVariable {
        name: name.into(),
        labels: areas.iter().map(|a| format!("A={a}")).collect(),
        matrix: AttributeMatrix::from_choices(vec![Attribute::Area], &rows).unwrap(),
        elements: vec![e],
    };
    let space = DesignSpace { continuous: vec![], categorical: vec![var("left", 0), var("right", 1)] };
    let constraints = vec![Constraint::Stress { element: 0, load_case: 0 }, Constraint::Stress { element: 1, load_case: 0 }];
    StructuralProblem::new("two-bar sizing", model, space, Objective::Mass, constraints).unwrap()
}

/// Lightest feasible design found by trying every combination of choices.
pub fn enumerate<P: frameopt::problem::DesignProblem>(p: &P) -> Vec<usize> {
    let counts: Vec<usize> = p.space().categorical.iter().map(|c| c.n_choices()).collect();
    let total: usize = counts.iter().product();
    let x = p.space().initial_x();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mut k in 0..total {
        let choices: Vec<usize> = counts
            .iter()
            .map(|&n| {
                let c = k % n;
                k /= n;
                c
            })
            .collect();
        let e = p.evaluate_choices(&choices, &x).unwrap();
        if e.max_violation() <= 0.0 && best.as_ref().is_none_or(|(m, _)| e.objective < *m) {
            best = Some((e.objective, choices));
        }
    }
    best.expect("some design is feasible").1
}

/// `Σ cᵢ (xᵢ − tᵢ)²` over box-bounded continuous variables, no constraints.
pub struct Bowl {
    pub space: DesignSpace,
    pub weights: Vec<f64>,
    pub targets: Vec<f64>,
}

impl Bowl {
    pub fn new(weights: Vec<f64>, targets: Vec<f64>, bounds: &[(f64, f64)], start: &[f64]) -> Self {
        let continuous = bounds
            .iter()
            .zip(start)
            .enumerate()
            .map(|(i, (&(lower, upper), &initial))| ContinuousVariable {
                name: format!("x{i}"),
                binding: Parameter::NodeCoordinate { nodes: vec![0], axis: 0 },
                lower,
                upper,
                initial,
            })
            .collect();
        Self { space: DesignSpace { continuous, categorical: vec![] }, weights, targets }
    }
}

impl frameopt::problem::DesignProblem for Bowl {
    fn space(&self) -> &DesignSpace {
        &self.space
    }

    fn evaluate(&self, _: &[Vec<f64>], x: &[f64]) -> frameopt::Result<frameopt::problem::Evaluation> {
        let objective = x.iter().zip(&self.weights).zip(&self.targets).map(|((x, c), t)| c * (x - t).powi(2)).sum();
        let counts = frameopt::problem::SolveCounts { primal: 1, ..Default::default() };
        Ok(frameopt::problem::Evaluation { objective, constraints: vec![], counts })
    }

    fn evaluate_with_gradients(
        &self,
        a: &[Vec<f64>],
        x: &[f64],
    ) -> frameopt::Result<(frameopt::problem::Evaluation, frameopt::problem::GradientBundle)> {
        let e = self.evaluate(a, x)?;
        let continuous = x.iter().zip(&self.weights).zip(&self.targets).map(|((x, c), t)| 2.0 * c * (x - t)).collect();
        let objective = frameopt::problem::FunctionGradient { continuous, attributes: vec![] };
        Ok((e, frameopt::problem::GradientBundle { objective, constraints: vec![] }))
    }

    fn constraint_labels(&self) -> Vec<String> {
        vec![]
    }
}
