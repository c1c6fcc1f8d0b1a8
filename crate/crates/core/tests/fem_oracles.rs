mod common;

use approx::assert_relative_eq;
use common::{cantilever, steel, two_bar};
use frameopt::bench::rectangle;
use frameopt::fem::{
    assemble, compliance, element_stress, lumped_mass, mass, smallest_frequency, smallest_mode, solve, strain_energy,
    CrossSection, ElementKind, FrameModel, LoadCase, Material, Node, PointLoad, Realization, Support,
};
use nalgebra::DVector;

const P: f64 = 1500.0;
const L: f64 = 2.5;

fn section() -> CrossSection {
    rectangle("r", 0.1, 0.06)
}

fn tip_uz(model: &FrameModel) -> f64 {
    let real = Realization::from_model(model);
    let a = assemble(model, &real).unwrap();
    let s = solve(&a).unwrap();
    let tip = model.nodes.len() - 1;
    s.displacements[0][a.dofs.dof(tip, 2).unwrap()]
}

#[test]
fn cantilever_tip_deflection_is_exact() {
    let s = section();
    let e = steel().youngs_modulus;
    let exact = -P * L.powi(3) / (3.0 * e * s.iyy);
    for n in [1, 3, 8] {
        let m = cantilever(n, L, steel(), s.clone(), [0.0, 0.0, -P, 0.0, 0.0, 0.0]);
        let uz = tip_uz(&m);
        assert!((uz - exact).abs() <= 1e-10 * exact.abs(), "{n} elements: {uz} vs {exact}");
    }
}

#[test]
fn cantilever_lateral_deflection_uses_other_inertia() {
    let s = section();
    let m = cantilever(2, L, steel(), s.clone(), [0.0, P, 0.0, 0.0, 0.0, 0.0]);
    let real = Realization::from_model(&m);
    let a = assemble(&m, &real).unwrap();
    let u = &solve(&a).unwrap().displacements[0];
    let uy = u[a.dofs.dof(2, 1).unwrap()];
    assert_relative_eq!(uy, P * L.powi(3) / (3.0 * steel().youngs_modulus * s.izz), max_relative = 1e-10);
}

#[test]
fn cantilever_energy_and_root_stress() {
    let s = section();
    let e = steel().youngs_modulus;
    let m = cantilever(4, L, steel(), s.clone(), [0.0, 0.0, -P, 0.0, 0.0, 0.0]);
    let real = Realization::from_model(&m);
    let a = assemble(&m, &real).unwrap();
    let st = solve(&a).unwrap();
    let se = strain_energy(&a, &st, 0);
    assert_relative_eq!(se, P * P * L.powi(3) / (6.0 * e * s.iyy), max_relative = 1e-10);
    assert_relative_eq!(se, 0.5 * compliance(&a, &st, 0), max_relative = 1e-12);
    let (root, _) = element_stress(&m, &real, &a, &st, 0, 0).unwrap();
    assert_relative_eq!(root, P * L * s.max_fiber_distance_z / s.iyy, max_relative = 1e-9);
}

#[test]
fn zero_load_gives_zero_response() {
    let mut m = cantilever(3, L, steel(), section(), [0.0; 6]);
    m.load_cases.push(LoadCase { name: "empty".into(), ..Default::default() });
    let real = Realization::from_model(&m);
    let a = assemble(&m, &real).unwrap();
    assert!(a.loads.iter().all(|f| f.amax() == 0.0));
    let st = solve(&a).unwrap();
    assert!(st.displacements.iter().all(|u| u.amax() == 0.0));
    assert_eq!(strain_energy(&a, &st, 1), 0.0);
    let (s, _) = element_stress(&m, &real, &a, &st, 2, 1).unwrap();
    assert_eq!(s, 0.0);
}

fn free_beam(n: usize) -> FrameModel {
    let mut m = cantilever(n, L, steel(), section(), [0.0; 6]);
    for (i, node) in m.nodes.iter_mut().enumerate() {
        // skew it off the axes so every coupling term appears
        node.position = [0.7 * i as f64, 0.4 * i as f64, 0.3 * (i * i) as f64];
    }
    for e in &mut m.elements {
        e.orientation_angle = 0.3;
    }
    m.supports.clear();
    m
}

#[test]
fn free_free_beam_has_six_rigid_modes() {
    let m = free_beam(3);
    let a = assemble(&m, &Realization::from_model(&m)).unwrap();
    let k = &a.stiffness;
    let asym = (k - k.transpose()).amax() / k.amax();
    assert!(asym < 1e-12, "asymmetry {asym}");
    let eig = k.clone().symmetric_eigen();
    let max = eig.eigenvalues.amax();
    let zeros = eig.eigenvalues.iter().filter(|v| v.abs() < 1e-8 * max).count();
    assert_eq!(zeros, 6);

    // translations and linearized rotations are annihilated
    let n = m.nodes.len();
    for mode in 0..6 {
        let mut v = DVector::zeros(6 * n);
        for (i, node) in m.nodes.iter().enumerate() {
            let p = node.position;
            if mode < 3 {
                v[6 * i + mode] = 1.0;
            } else {
                let w = [(mode == 3) as u8 as f64, (mode == 4) as u8 as f64, (mode == 5) as u8 as f64];
                let t = [w[1] * p[2] - w[2] * p[1], w[2] * p[0] - w[0] * p[2], w[0] * p[1] - w[1] * p[0]];
                for d in 0..3 {
                    v[6 * i + d] = t[d];
                    v[6 * i + 3 + d] = w[d];
                }
            }
        }
        let r = k * &v;
        assert!(r.norm() < 1e-8 * max * v.norm(), "mode {mode}: {}", r.norm());
    }
}

#[test]
fn lumped_cantilever_frequency_converges() {
    let s = section();
    let mt = steel();
    let analytic = 3.516 / (2.0 * std::f64::consts::PI * L * L) * (mt.youngs_modulus * s.iyy.min(s.izz) / (mt.density * s.area)).sqrt();
    for n in [8, 16] {
        let m = cantilever(n, L, mt.clone(), s.clone(), [0.0; 6]);
        let f = smallest_frequency(&m, &Realization::from_model(&m)).unwrap();
        let err = (f - analytic).abs() / analytic;
        assert!(err < 0.05, "{n} elements: {f} Hz vs {analytic} Hz");
    }
}

fn axial_spring(e: f64) -> FrameModel {
    FrameModel {
        nodes: vec![Node { id: 1, position: [0.0; 3] }, Node { id: 2, position: [2.0, 0.0, 0.0] }],
        materials: vec![Material { name: "m".into(), youngs_modulus: e, poisson_ratio: 0.3, density: 3.0, yield_stress: 1.0 }],
        sections: vec![CrossSection::truss("a", 0.5)],
        elements: vec![frameopt::fem::Element {
            id: 1,
            kind: ElementKind::Truss,
            node_a: 0,
            node_b: 1,
            material: 0,
            section: 0,
            orientation_angle: 0.0,
        }],
        supports: vec![Support::pinned(0), Support::new(1, [false, true, true, false, false, false])],
        load_cases: vec![LoadCase {
            name: "pull".into(),
            point_loads: vec![PointLoad { node: 1, load: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0] }],
            ..Default::default()
        }],
    }
}

#[test]
fn single_dof_frequency_and_modulus_scaling() {
    let e = 400.0;
    let m = axial_spring(e);
    let real = Realization::from_model(&m);
    let (k, mass_free) = (e * 0.5 / 2.0, 3.0 * 0.5 * 2.0 / 2.0);
    let f = smallest_frequency(&m, &real).unwrap();
    assert_relative_eq!(f, (k / mass_free).sqrt() / (2.0 * std::f64::consts::PI), max_relative = 1e-10);
    let f4 = smallest_frequency(&axial_spring(4.0 * e), &Realization::from_model(&axial_spring(4.0 * e))).unwrap();
    assert_relative_eq!(f4, 2.0 * f, max_relative = 1e-10);

    let a = assemble(&m, &real).unwrap();
    let st = solve(&a).unwrap();
    let lm = lumped_mass(&m, &real, &a.dofs);
    let modal = smallest_mode(&a, &st.factorization, &lm).unwrap();
    assert_relative_eq!(modal.eigenvalue, k / mass_free, max_relative = 1e-10);
}

#[test]
fn two_bar_member_forces_match_statics() {
    let (b, h, area, p) = (3.0, 4.0, 0.2, 100.0);
    let m = two_bar(b, h, area, p);
    let real = Realization::from_model(&m);
    let a = assemble(&m, &real).unwrap();
    let st = solve(&a).unwrap();
    let sin = h / (b * b + h * h).sqrt();
    for e in 0..2 {
        let (s, _) = element_stress(&m, &real, &a, &st, e, 0).unwrap();
        assert_relative_eq!(s * area, p / (2.0 * sin), max_relative = 1e-10);
    }
    // residual of the reduced system
    let f = &a.loads[0];
    let r = &a.stiffness * &st.displacements[0] - f;
    let free_r: f64 = a.dofs.free().iter().map(|&d| r[d] * r[d]).sum::<f64>().sqrt();
    assert!(free_r < 1e-8 * f.norm());
}

#[test]
fn mass_is_rho_a_l_and_linear_in_area() {
    let mut m = axial_spring(1.0);
    m.materials[0].density = 1.0;
    m.sections[0].area = 2.0;
    m.nodes[1].position = [0.0, 3.0, 0.0];
    assert_relative_eq!(mass(&m, &Realization::from_model(&m)), 6.0, max_relative = 1e-14);
    m.sections[0].area = 5.0;
    assert_relative_eq!(mass(&m, &Realization::from_model(&m)), 15.0, max_relative = 1e-14);
}

#[test]
fn mechanism_is_reported() {
    let mut m = two_bar(3.0, 4.0, 0.2, 100.0);
    m.supports.pop();
    let a = assemble(&m, &Realization::from_model(&m)).unwrap();
    let err = solve(&a).unwrap_err();
    assert!(matches!(err, frameopt::Error::Mechanism(_)), "{err}");
}
