mod common;

use common::random_frame;
use frameopt::adjoint::Objective;
use frameopt::fem::element::element_stiffness;
use frameopt::fem::{assemble, compliance, mass, solve, strain_energy, ElementKind, ElementProps};
use proptest::prelude::*;

fn props(area: f64, iyy: f64, izz: f64, j: f64, roll: f64) -> ElementProps {
    ElementProps {
        kind: ElementKind::Beam,
        area,
        iyy,
        izz,
        torsion_constant: j,
        youngs_modulus: 200.0,
        poisson_ratio: 0.3,
        density: 1.0,
        yield_stress: 1.0,
        fiber_y: 0.1,
        fiber_z: 0.1,
        roll,
    }
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beam_stiffness_is_symmetric_psd_with_rigid_modes(
        pa in point(), pb in point(), area in 0.01..1.0f64, iyy in 1e-4..1e-1f64, izz in 1e-4..1e-1f64,
        j in 1e-4..1e-1f64, roll in -3.0..3.0f64,
    ) {
        let d = ((pb[0]-pa[0]).powi(2) + (pb[1]-pa[1]).powi(2) + (pb[2]-pa[2]).powi(2)).sqrt();
        prop_assume!(d > 0.2);
        let k = element_stiffness(&props(area, iyy, izz, j, roll), pa, pb).unwrap();
        let max = k.amax();
        prop_assert!((&k - k.transpose()).amax() <= 1e-12 * max);
        let eig = k.symmetric_eigen().eigenvalues;
        prop_assert!(eig.iter().all(|v| *v > -1e-9 * max));
        prop_assert_eq!(eig.iter().filter(|v| v.abs() < 1e-9 * max).count(), 6);
    }

    #[test]
    fn random_frames_obey_energy_identities(seed in 0u64..200, c0 in 0usize..3, c1 in 0usize..3) {
        let p = random_frame(seed, Objective::StrainEnergy);
        let attrs = p.space.hard_attributes(&[c0, c1]);
        let real = p.space.realize(&p.model, &attrs, &p.space.initial_x()).unwrap();
        let a = assemble(&p.model, &real).unwrap();
        let s = solve(&a).unwrap();
        let k = &a.stiffness;
        prop_assert!((k - k.transpose()).amax() <= 1e-12 * k.amax());
        for lc in 0..p.model.load_cases.len() {
            let se = strain_energy(&a, &s, lc);
            prop_assert!(se >= 0.0);
            prop_assert!((se - 0.5 * compliance(&a, &s, lc)).abs() <= 1e-9 * se);
            let u = &s.displacements[lc];
            let r = k * u - &a.loads[lc];
            let f = &a.loads[lc];
            let free: f64 = a.dofs.free().iter().map(|&d| r[d] * r[d]).sum::<f64>().sqrt();
            let fnorm: f64 = a.dofs.free().iter().map(|&d| f[d] * f[d]).sum::<f64>().sqrt();
            prop_assert!(free < 1e-8 * fnorm);
        }
    }

    #[test]
    fn mass_is_linear_in_area(seed in 0u64..200, scale in 0.1..10.0f64) {
        let p = random_frame(seed, Objective::Mass);
        let mut real = p.space.realize(&p.model, &p.space.hard_attributes(&[0, 0]), &p.space.initial_x()).unwrap();
        let m0 = mass(&p.model, &real);
        let e0 = real.props[2].area;
        real.props[2].area = 0.0;
        let m_without = mass(&p.model, &real);
        real.props[2].area = e0 * scale;
        let m1 = mass(&p.model, &real);
        prop_assert!(((m1 - m_without) - scale * (m0 - m_without)).abs() <= 1e-12 * m0);
    }
}
