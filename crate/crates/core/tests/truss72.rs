use frameopt::bench::{generate_truss72, truss72_area_index, truss72_groups, TRUSS72_AREAS};
use frameopt::problem::DesignProblem;

const NS: [f64; 16] = [
    0.196, 0.563, 0.391, 0.563, 0.563, 0.563, 0.111, 0.111, 1.228, 0.563, 0.111, 0.111, 1.990, 0.442, 0.111, 0.111,
];
const GSMO: [f64; 16] = [
    0.141, 0.563, 0.391, 0.563, 0.563, 0.563, 0.111, 0.111, 1.228, 0.442, 0.111, 0.111, 1.990, 0.563, 0.111, 0.111,
];

fn choices(areas: &[f64]) -> Vec<usize> {
    areas.iter().map(|&a| truss72_area_index(a).expect("catalog area")).collect()
}

#[test]
fn reference_designs_have_published_mass() {
    let p = generate_truss72().build().unwrap();
    for (areas, mass) in [(NS, 389.33), (GSMO, 388.01)] {
        let e = p.evaluate_choices(&choices(&areas), &[]).unwrap();
        println!("mass {} max violation {}", e.objective, e.max_violation());
        assert!((e.objective - mass).abs() / mass < 5e-3, "{} vs {mass}", e.objective);
    }
}

#[test]
fn ns_design_respects_drift_limit_under_vertical_load() {
    let p = generate_truss72().build().unwrap();
    let e = p.evaluate_choices(&choices(&NS), &[]).unwrap();
    let labels = p.constraint_labels();
    let lc2: Vec<f64> = labels
        .iter()
        .zip(&e.constraints)
        .filter(|(l, _)| l.starts_with("disp") && l.ends_with("lc2]"))
        .map(|(_, g)| *g)
        .collect();
    assert_eq!(lc2.len(), 8);
    assert!(lc2.iter().all(|g| *g <= 0.0), "{lc2:?}");
}

#[test]
fn ns_design_is_feasible_and_drift_is_active() {
    let p = generate_truss72().build().unwrap();
    let e = p.evaluate_choices(&choices(&NS), &[]).unwrap();
    assert!(e.max_violation() == 0.0, "max violation {}", e.max_violation());
    let worst = e.constraints.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(worst > -0.01, "drift limit should be nearly active, got {worst}");
}

#[test]
fn catalog_and_groups() {
    let areas: Vec<f64> = TRUSS72_AREAS.iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(areas.len(), 64);
    assert_eq!(areas.iter().cloned().fold(f64::INFINITY, f64::min), 0.111);
    assert_eq!(areas.iter().cloned().fold(0.0, f64::max), 33.5);
    let groups = truss72_groups();
    assert_eq!(groups.len(), 16);
    let mut covered = vec![0; 72];
    for (a, b) in groups {
        for m in a..=b {
            covered[m - 1] += 1;
        }
    }
    assert!(covered.iter().all(|&c| c == 1));
}

#[test]
fn generator_is_a_pure_constant() {
    assert_eq!(generate_truss72().to_json(), generate_truss72().to_json());
    let p = generate_truss72().build().unwrap();
    assert_eq!((p.model.nodes.len(), p.model.elements.len()), (20, 72));
    assert_eq!((p.space.n_categorical(), p.space.n_continuous()), (16, 0));
    assert!(p.space.categorical.iter().all(|c| c.n_choices() == 64));
}
