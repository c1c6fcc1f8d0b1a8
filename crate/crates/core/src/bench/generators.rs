//! Built-in benchmark problems.

use std::f64::consts::FRAC_PI_2;

use super::document::*;
use super::sections::{box_section, channel, i_beam, rectangle, solid_circle, tube};
use crate::adjoint::Objective;
use crate::error::{Error, Result};
use crate::fem::{Attribute, CrossSection, ElementKind, Material};
use crate::ga::GaConfig;
use crate::optimizer::OptimizerConfig;

/// The 64 available member areas of the 72-bar truss, in².
pub const TRUSS72_AREAS: [&str; 64] = [
    "0.111", "0.141", "0.196", "0.250", "0.307", "0.391", "0.442", "0.563", "0.602", "0.766", "0.785", "0.994",
    "1.000", "1.228", "1.266", "1.457", "1.563", "1.620", "1.800", "1.990", "2.130", "2.380", "2.620", "2.630",
    "2.880", "2.930", "3.090", "3.130", "3.380", "3.470", "3.550", "3.630", "3.840", "3.870", "3.880", "4.180",
    "4.220", "4.490", "4.590", "4.800", "4.970", "5.120", "5.740", "7.220", "7.970", "8.530", "9.300", "10.85",
    "11.50", "13.50", "13.90", "14.20", "15.50", "16.00", "16.90", "18.80", "19.90", "22.00", "22.90", "24.50",
    "26.50", "28.00", "30.00", "33.50",
];

/// Member id ranges (1-based, inclusive) of the 16 symmetry groups.
pub fn truss72_groups() -> Vec<(usize, usize)> {
    (0..4)
        .flat_map(|s| {
            let b = 18 * s;
            [(b + 1, b + 4), (b + 5, b + 12), (b + 13, b + 16), (b + 17, b + 18)]
        })
        .collect()
}

/// Index of an area in [`TRUSS72_AREAS`].
pub fn truss72_area_index(area: f64) -> Option<usize> {
    TRUSS72_AREAS.iter().position(|s| (s.parse::<f64>().expect("numeric") - area).abs() < 1e-9)
}

fn translations() -> Vec<Dof> {
    vec![Dof::Ux, Dof::Uy, Dof::Uz]
}

/// The four-story 72-bar space truss: 120 in × 120 in plan, 60 in stories,
/// top nodes 1–4, ground supports 17–20.
pub fn generate_truss72() -> ProblemDocument {
    let (plan, story) = (120.0, 60.0);
    let corners = [(0.0, 0.0), (plan, 0.0), (plan, plan), (0.0, plan)];
    let nodes = (0..5)
        .flat_map(|level| {
            let z = story * (4 - level) as f64;
            corners.iter().enumerate().map(move |(c, &(x, y))| NodeDoc { id: 4 * level + c + 1, position: [x, y, z] })
        })
        .collect();

    let mut elements = Vec::with_capacity(72);
    let mut push = |a: usize, b: usize| {
        let id = elements.len() + 1;
        elements.push(ElementDoc {
            id,
            kind: ElementKind::Truss,
            nodes: [a, b],
            material: "aluminum".into(),
            section: "catalog".into(),
            orientation_angle: 0.0,
        });
    };
    for s in 0..4 {
        let up = |c: usize| 4 * s + c % 4 + 1;
        let lo = |c: usize| 4 * s + 4 + c % 4 + 1;
        for c in 0..4 {
            push(up(c), lo(c));
        }
        for c in 0..4 {
            push(up(c), lo(c + 1));
            push(up(c + 1), lo(c));
        }
        for c in 0..4 {
            push(up(c), up(c + 1));
        }
        push(up(0), up(2));
        push(up(1), up(3));
    }

    let choices: Vec<ChoiceDoc> = TRUSS72_AREAS
        .iter()
        .map(|s| ChoiceDoc { label: s.to_string(), section: None, values: Some(vec![s.parse().expect("numeric")]) })
        .collect();
    let categorical = truss72_groups()
        .into_iter()
        .enumerate()
        .map(|(g, (a, b))| CategoricalDoc {
            name: format!("group{} (members {a}-{b})", g + 1),
            attributes: vec![Attribute::Area],
            choices: choices.clone(),
            elements: (a..=b).collect(),
        })
        .collect();

    let mut constraints = vec![ConstraintDoc::StressAll];
    for load_case in 1..=2 {
        for node in 1..=4 {
            for dof in [Dof::Ux, Dof::Uy] {
                constraints.push(ConstraintDoc::Displacement { node, dof, load_case, limit: 0.25 });
            }
        }
    }

    ProblemDocument {
        schema_version: SCHEMA_VERSION,
        name: "truss72".into(),
        description: "72-bar space truss, mass minimization under stress and displacement limits (lb, in)".into(),
        nodes,
        materials: vec![Material {
            name: "aluminum".into(),
            youngs_modulus: 1e7,
            poisson_ratio: 0.3,
            density: 0.1,
            yield_stress: 25000.0,
        }],
        sections: vec![CrossSection::truss("catalog", 0.111)],
        elements,
        supports: (17..=20).map(|node| SupportDoc { node, fixed: translations(), prescribed: vec![] }).collect(),
        load_cases: vec![
            LoadCaseDoc {
                // the classic benchmark load; with Pz = 0 the published
                // designs exceed the drift limit by 30%
                name: "lateral".into(),
                point_loads: vec![PointLoadDoc { node: 1, load: [5000.0, 5000.0, -5000.0, 0.0, 0.0, 0.0] }],
                distributed_loads: vec![],
                gravity: None,
            },
            LoadCaseDoc {
                name: "vertical".into(),
                point_loads: (1..=4)
                    .map(|node| PointLoadDoc { node, load: [0.0, 0.0, -5000.0, 0.0, 0.0, 0.0] })
                    .collect(),
                distributed_loads: vec![],
                gravity: None,
            },
        ],
        design: DesignDoc { continuous: vec![], categorical },
        objective: Objective::Mass,
        constraints,
        optimizer: OptimizerConfig::default(),
        ga: GaConfig::default(),
    }
}

fn steel() -> Material {
    Material {
        name: "steel".into(),
        youngs_modulus: 210e9,
        poisson_ratio: 0.3,
        density: 7850.0,
        yield_stress: 360e6,
    }
}

fn beam(id: usize, a: usize, b: usize, section: &str) -> ElementDoc {
    ElementDoc {
        id,
        kind: ElementKind::Beam,
        nodes: [a, b],
        material: "steel".into(),
        section: section.into(),
        orientation_angle: 0.0,
    }
}

fn orientation_variables(elements: &[ElementDoc]) -> Vec<ContinuousDoc> {
    elements
        .iter()
        .map(|e| ContinuousDoc {
            name: format!("roll{}", e.id),
            binding: BindingDoc::ElementAttribute { attribute: Attribute::OrientationAngle, elements: vec![e.id] },
            lower: -FRAC_PI_2,
            upper: FRAC_PI_2,
            initial: 0.0,
        })
        .collect()
}

/// Cubic-cell beam lattice pulled along Z (SI units).
///
/// Cells of 1 m are centered on the origin. Each cell has edge members and a
/// center node tied to its eight corners. When `cells_z` is odd the vertical
/// edges crossing the mid-plane are split there. The bottom face is pinned,
/// the top face is held laterally and pulled 0.05 m per cell along Z.
/// Mid-plane perimeter nodes must not move inward. Member groups (along X,
/// Y, Z, diagonal) choose among four sections; interior node coordinates and
/// member roll angles are continuous.
pub fn generate_lattice(cells_x: usize, cells_y: usize, cells_z: usize) -> Result<ProblemDocument> {
    if cells_x == 0 || cells_y == 0 || cells_z == 0 {
        return Err(Error::Config(format!("lattice needs at least one cell per axis, got {cells_x}×{cells_y}×{cells_z}")));
    }
    let a = 1.0;
    let stretch = 0.05 * cells_z as f64;
    let (cx, cy, cz) = (cells_x, cells_y, cells_z);
    let coord = |i: usize, n: usize| (i as f64 - n as f64 / 2.0) * a;

    let mut nodes: Vec<NodeDoc> = Vec::new();
    let mut add_node = |p: [f64; 3]| {
        let id = nodes.len() + 1;
        nodes.push(NodeDoc { id, position: p });
        id
    };
    let mut grid = vec![0usize; (cx + 1) * (cy + 1) * (cz + 1)];
    let gidx = |i: usize, j: usize, k: usize| (k * (cy + 1) + j) * (cx + 1) + i;
    for k in 0..=cz {
        for j in 0..=cy {
            for i in 0..=cx {
                grid[gidx(i, j, k)] = add_node([coord(i, cx), coord(j, cy), coord(k, cz)]);
            }
        }
    }
    let split_layer = (cz % 2 == 1).then_some(cz / 2);
    let mut mid = vec![0usize; (cx + 1) * (cy + 1)];
    if split_layer.is_some() {
        for j in 0..=cy {
            for i in 0..=cx {
                mid[j * (cx + 1) + i] = add_node([coord(i, cx), coord(j, cy), 0.0]);
            }
        }
    }
    let mut centers = Vec::new();
    for k in 0..cz {
        for j in 0..cy {
            for i in 0..cx {
                let c = |v: usize, n: usize| coord(v, n) + a / 2.0;
                centers.push(((i, j, k), add_node([c(i, cx), c(j, cy), c(k, cz)])));
            }
        }
    }

    let mut elements = Vec::new();
    let mut groups: [Vec<usize>; 4] = Default::default();
    let mut add = |g: usize, p: usize, q: usize, elements: &mut Vec<ElementDoc>| {
        let id = elements.len() + 1;
        elements.push(beam(id, p, q, "L1"));
        groups[g].push(id);
    };
    for k in 0..=cz {
        for j in 0..=cy {
            for i in 0..=cx {
                let n = grid[gidx(i, j, k)];
                if i < cx {
                    add(0, n, grid[gidx(i + 1, j, k)], &mut elements);
                }
                if j < cy {
                    add(1, n, grid[gidx(i, j + 1, k)], &mut elements);
                }
                if k < cz {
                    let up = grid[gidx(i, j, k + 1)];
                    if split_layer == Some(k) {
                        let m = mid[j * (cx + 1) + i];
                        add(2, n, m, &mut elements);
                        add(2, m, up, &mut elements);
                    } else {
                        add(2, n, up, &mut elements);
                    }
                }
            }
        }
    }
    for &((i, j, k), c) in &centers {
        for dk in 0..2 {
            for dj in 0..2 {
                for di in 0..2 {
                    add(3, c, grid[gidx(i + di, j + dj, k + dk)], &mut elements);
                }
            }
        }
    }

    let mut supports = Vec::new();
    for j in 0..=cy {
        for i in 0..=cx {
            supports.push(SupportDoc { node: grid[gidx(i, j, 0)], fixed: translations(), prescribed: vec![] });
            supports.push(SupportDoc {
                node: grid[gidx(i, j, cz)],
                fixed: translations(),
                prescribed: vec![PrescribedDoc { dof: Dof::Uz, value: stretch }],
            });
        }
    }

    let (hx, hy) = (cx as f64 * a / 2.0, cy as f64 * a / 2.0);
    let on_boundary = |p: &[f64; 3]| {
        let hz = cz as f64 * a / 2.0;
        (p[0].abs() - hx).abs() < 1e-12 || (p[1].abs() - hy).abs() < 1e-12 || (p[2].abs() - hz).abs() < 1e-12
    };
    let mut constraints = Vec::new();
    for n in &nodes {
        let p = n.position;
        let perimeter = (p[0].abs() - hx).abs() < 1e-12 || (p[1].abs() - hy).abs() < 1e-12;
        if p[2] == 0.0 && perimeter {
            for axis in [Axis::X, Axis::Y] {
                if p[axis.index()] != 0.0 {
                    constraints.push(ConstraintDoc::Stretch { node: n.id, axis, load_case: 1 });
                }
            }
        }
    }

    let mut continuous = Vec::new();
    for n in nodes.iter().filter(|n| !on_boundary(&n.position)) {
        for axis in Axis::ALL {
            let x0 = n.position[axis.index()];
            continuous.push(ContinuousDoc {
                name: format!("node{}.{axis:?}", n.id).to_lowercase(),
                binding: BindingDoc::NodeCoordinate { nodes: vec![n.id], axis },
                lower: x0 - 0.25 * a,
                upper: x0 + 0.25 * a,
                initial: x0,
            });
        }
    }
    continuous.extend(orientation_variables(&elements));

    let sections = vec![
        solid_circle("L1", 0.02),
        rectangle("L2", 0.03, 0.03),
        tube("L3", 0.03, 0.003),
        rectangle("L4", 0.05, 0.015),
    ];
    let choices: Vec<ChoiceDoc> =
        sections.iter().map(|s| ChoiceDoc { label: s.name.clone(), section: Some(s.name.clone()), values: None }).collect();
    let categorical = ["along_x", "along_y", "along_z", "diagonal"]
        .iter()
        .zip(groups)
        .filter(|(_, members)| !members.is_empty())
        .map(|(name, members)| CategoricalDoc {
            name: name.to_string(),
            attributes: vec![Attribute::Area, Attribute::Iyy, Attribute::Izz, Attribute::TorsionConstant],
            choices: choices.clone(),
            elements: members,
        })
        .collect();

    Ok(ProblemDocument {
        schema_version: SCHEMA_VERSION,
        name: format!("lattice{cx}x{cy}x{cz}"),
        description: "beam lattice pulled along Z; mid-plane perimeter must not contract (SI units)".into(),
        nodes,
        materials: vec![steel()],
        sections,
        elements,
        supports,
        load_cases: vec![LoadCaseDoc {
            name: "stretch".into(),
            point_loads: vec![],
            distributed_loads: vec![],
            gravity: None,
        }],
        design: DesignDoc { continuous, categorical },
        objective: Objective::Zero,
        constraints,
        optimizer: OptimizerConfig::default(),
        ga: GaConfig::default(),
    })
}

/// The five bridge profiles, in meters.
pub fn bridge_sections() -> Vec<CrossSection> {
    let mm = 1e-3;
    vec![
        solid_circle("CS1", 40.0 * mm),
        rectangle("CS2", 80.0 * mm, 100.0 * mm),
        box_section("CS3", 125.0 * mm, 75.0 * mm, 5.0 * mm),
        i_beam("CS4", 200.0 * mm, 150.0 * mm, 10.0 * mm),
        channel("CS5", 150.0 * mm, 80.0 * mm, 7.0 * mm),
    ]
}

/// Pratt-style deck bridge of `panels` 1 m panels, 1 m wide and 1 m high
/// (SI units).
///
/// Floor members carry 1000 N/m downward; gravity acts on everything; the
/// four end nodes are clamped. Strain energy is minimized subject to element
/// stresses and a 50 Hz lower bound on the first natural frequency. Every
/// member picks one of five profiles; member roll angles and the heights of
/// the top-chord stations are continuous.
pub fn generate_bridge(panels: usize) -> Result<ProblemDocument> {
    if panels < 2 {
        return Err(Error::Config(format!("bridge needs at least 2 panels, got {panels}")));
    }
    let (lp, width, height) = (1.0, 1.0, 1.0);
    let p = panels;
    let mut nodes = Vec::new();
    let mut add_node = |pos: [f64; 3]| {
        let id = nodes.len() + 1;
        nodes.push(NodeDoc { id, position: pos });
        id
    };
    // the four end nodes first, so the clamped supports are nodes 1-4
    let mut bottom = vec![[0usize; 2]; p + 1];
    for &i in &[0, p] {
        for (s, b) in bottom[i].iter_mut().enumerate() {
            *b = add_node([i as f64 * lp, s as f64 * width, 0.0]);
        }
    }
    for (i, row) in bottom.iter_mut().enumerate().take(p).skip(1) {
        for (s, b) in row.iter_mut().enumerate() {
            *b = add_node([i as f64 * lp, s as f64 * width, 0.0]);
        }
    }
    let mut top = vec![[0usize; 2]; p + 1];
    for (i, row) in top.iter_mut().enumerate().take(p).skip(1) {
        for (s, t) in row.iter_mut().enumerate() {
            *t = add_node([i as f64 * lp, s as f64 * width, height]);
        }
    }

    let mut elements = Vec::new();
    let mut floor = Vec::new();
    let mut add = |a: usize, b: usize, on_floor: bool, elements: &mut Vec<ElementDoc>| {
        let id = elements.len() + 1;
        elements.push(beam(id, a, b, "CS1"));
        if on_floor {
            floor.push(id);
        }
    };
    for i in 0..p {
        for s in 0..2 {
            add(bottom[i][s], bottom[i + 1][s], true, &mut elements);
        }
    }
    for row in &bottom {
        add(row[0], row[1], true, &mut elements);
    }
    for s in 0..2 {
        add(bottom[0][s], top[1][s], false, &mut elements);
        add(bottom[p][s], top[p - 1][s], false, &mut elements);
        for i in 1..p {
            add(bottom[i][s], top[i][s], false, &mut elements);
        }
        for i in 1..p.saturating_sub(1) {
            add(top[i][s], top[i + 1][s], false, &mut elements);
        }
        // Pratt diagonals lean toward midspan
        for i in 1..p.saturating_sub(1) {
            if 2 * (i + 1) <= p {
                add(top[i][s], bottom[i + 1][s], false, &mut elements);
            } else {
                add(top[i + 1][s], bottom[i][s], false, &mut elements);
            }
        }
    }
    for row in top.iter().take(p).skip(1) {
        add(row[0], row[1], false, &mut elements);
    }

    let mut continuous = orientation_variables(&elements);
    for (i, row) in top.iter().enumerate().take(p).skip(1) {
        continuous.push(ContinuousDoc {
            name: format!("height{i}"),
            binding: BindingDoc::NodeCoordinate { nodes: row.to_vec(), axis: Axis::Z },
            lower: 0.75 * height,
            upper: 1.25 * height,
            initial: height,
        });
    }
    let sections = bridge_sections();
    let choices: Vec<ChoiceDoc> =
        sections.iter().map(|s| ChoiceDoc { label: s.name.clone(), section: Some(s.name.clone()), values: None }).collect();
    let categorical = elements
        .iter()
        .map(|e| CategoricalDoc {
            name: format!("section{}", e.id),
            attributes: vec![
                Attribute::Area,
                Attribute::Iyy,
                Attribute::Izz,
                Attribute::TorsionConstant,
                Attribute::MaxFiberDistanceY,
                Attribute::MaxFiberDistanceZ,
            ],
            choices: choices.clone(),
            elements: vec![e.id],
        })
        .collect();

    Ok(ProblemDocument {
        schema_version: SCHEMA_VERSION,
        name: format!("bridge{p}"),
        description: "deck bridge, strain energy under floor load and gravity with stress and frequency limits (SI units)"
            .into(),
        nodes,
        materials: vec![steel()],
        sections,
        supports: (1..=4).map(|node| SupportDoc { node, fixed: Dof::ALL.to_vec(), prescribed: vec![] }).collect(),
        load_cases: vec![LoadCaseDoc {
            name: "service".into(),
            point_loads: vec![],
            distributed_loads: floor.iter().map(|&element| DistributedLoadDoc { element, load: [0.0, 0.0, -1000.0] }).collect(),
            gravity: Some([0.0, 0.0, -9.81]),
        }],
        elements,
        design: DesignDoc { continuous, categorical },
        objective: Objective::StrainEnergy,
        constraints: vec![ConstraintDoc::StressAll, ConstraintDoc::Frequency { min_hz: 50.0 }],
        optimizer: OptimizerConfig::default(),
        ga: GaConfig::default(),
    })
}

/// Resolves `builtin:truss72`, `builtin:lattice:X,Y,Z` and `builtin:bridge:P`.
pub fn builtin(spec: &str) -> Result<ProblemDocument> {
    let rest = spec
        .strip_prefix("builtin:")
        .ok_or_else(|| Error::Config(format!("'{spec}' is not a builtin problem")))?;
    let mut parts = rest.splitn(2, ':');
    let name = parts.next().unwrap_or_default();
    let args: Vec<usize> = match parts.next() {
        Some(a) => a
            .split(',')
            .map(|v| v.trim().parse().map_err(|_| Error::Config(format!("bad builtin argument '{v}'"))))
            .collect::<Result<_>>()?,
        None => vec![],
    };
    match (name, args.as_slice()) {
        ("truss72", []) => Ok(generate_truss72()),
        ("lattice", [x, y, z]) => generate_lattice(*x, *y, *z),
        ("bridge", [p]) => generate_bridge(*p),
        _ => Err(Error::Config(format!(
            "unknown builtin '{spec}'; expected builtin:truss72, builtin:lattice:X,Y,Z or builtin:bridge:P"
        ))),
    }
}
