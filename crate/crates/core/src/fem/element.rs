//! Element-level matrices for two-node truss and Euler-Bernoulli beam elements.
//!
//! Truss elements carry three translational dofs per node, beams all six
//! (`u, v, w, θx, θy, θz`). Matrices returned here are in global axes and in
//! element dof order: node `a` first, then node `b`.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::model::ElementKind;
use super::realization::ElementProps;
use crate::error::{Error, Result};

/// Local axes of an element. Rows of `rotation` are the local x, y, z unit
/// vectors expressed in global coordinates.
#[derive(Debug, Clone, Copy)]
pub struct LocalFrame {
    pub length: f64,
    pub rotation: Matrix3<f64>,
}

/// Builds the local frame from the end coordinates and the roll angle.
///
/// The unrolled local y axis is `ref × x`, with `ref` the global Z axis, or
/// global X for elements parallel to Z.
pub fn local_frame(pa: [f64; 3], pb: [f64; 3], roll: f64) -> Result<LocalFrame> {
    let d = Vector3::new(pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]);
    let length = d.norm();
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::Model(format!("element with ends {pa:?} and {pb:?} has zero length")));
    }
    let ex = d / length;
    let reference = if ex.z.abs() > 1.0 - 1e-9 { Vector3::x() } else { Vector3::z() };
    let ey0 = reference.cross(&ex).normalize();
    let ez0 = ex.cross(&ey0);
    let (s, c) = roll.sin_cos();
    let ey = ey0 * c + ez0 * s;
    let ez = ez0 * c - ey0 * s;
    let rotation = Matrix3::from_rows(&[ex.transpose(), ey.transpose(), ez.transpose()]);
    Ok(LocalFrame { length, rotation })
}

pub fn dof_count(kind: ElementKind) -> usize {
    match kind {
        ElementKind::Truss => 6,
        ElementKind::Beam => 12,
    }
}

/// Block-diagonal transformation from global to local element dofs.
fn transformation(frame: &LocalFrame, kind: ElementKind) -> DMatrix<f64> {
    let n = dof_count(kind);
    let mut t = DMatrix::zeros(n, n);
    for b in 0..n / 3 {
        t.view_mut((3 * b, 3 * b), (3, 3)).copy_from(&frame.rotation);
    }
    t
}

/// 12×12 Euler-Bernoulli beam stiffness in local axes.
pub fn beam_local_stiffness(p: &ElementProps, length: f64) -> DMatrix<f64> {
    let l = length;
    let (l2, l3) = (l * l, l * l * l);
    let e = p.youngs_modulus;
    let ea = e * p.area / l;
    let gj = p.shear_modulus() * p.torsion_constant / l;
    let (eiz, eiy) = (e * p.izz, e * p.iyy);
    let mut k = DMatrix::zeros(12, 12);
    let mut put = |i: usize, j: usize, v: f64| {
        k[(i, j)] += v;
        if i != j {
            k[(j, i)] += v;
        }
    };
    put(0, 0, ea);
    put(6, 6, ea);
    put(0, 6, -ea);
    put(3, 3, gj);
    put(9, 9, gj);
    put(3, 9, -gj);
    // bending in the local x-y plane (v, θz)
    put(1, 1, 12.0 * eiz / l3);
    put(7, 7, 12.0 * eiz / l3);
    put(1, 7, -12.0 * eiz / l3);
    put(1, 5, 6.0 * eiz / l2);
    put(1, 11, 6.0 * eiz / l2);
    put(5, 7, -6.0 * eiz / l2);
    put(7, 11, -6.0 * eiz / l2);
    put(5, 5, 4.0 * eiz / l);
    put(11, 11, 4.0 * eiz / l);
    put(5, 11, 2.0 * eiz / l);
    // bending in the local x-z plane (w, θy)
    put(2, 2, 12.0 * eiy / l3);
    put(8, 8, 12.0 * eiy / l3);
    put(2, 8, -12.0 * eiy / l3);
    put(2, 4, -6.0 * eiy / l2);
    put(2, 10, -6.0 * eiy / l2);
    put(4, 8, 6.0 * eiy / l2);
    put(8, 10, 6.0 * eiy / l2);
    put(4, 4, 4.0 * eiy / l);
    put(10, 10, 4.0 * eiy / l);
    put(4, 10, 2.0 * eiy / l);
    k
}

/// Element stiffness in global axes (6×6 truss, 12×12 beam).
pub fn element_stiffness(p: &ElementProps, pa: [f64; 3], pb: [f64; 3]) -> Result<DMatrix<f64>> {
    let frame = local_frame(pa, pb, p.roll)?;
    Ok(match p.kind {
        ElementKind::Truss => {
            let c = frame.rotation.row(0).transpose();
            let block = c * c.transpose() * (p.youngs_modulus * p.area / frame.length);
            let mut k = DMatrix::zeros(6, 6);
            k.view_mut((0, 0), (3, 3)).copy_from(&block);
            k.view_mut((3, 3), (3, 3)).copy_from(&block);
            k.view_mut((0, 3), (3, 3)).copy_from(&(-block));
            k.view_mut((3, 0), (3, 3)).copy_from(&(-block));
            k
        }
        ElementKind::Beam => {
            let t = transformation(&frame, p.kind);
            let kl = beam_local_stiffness(p, frame.length);
            t.transpose() * kl * t
        }
    })
}

/// Consistent nodal loads of a uniform distributed load `w` (global, force per length).
pub fn distributed_load_vector(p: &ElementProps, pa: [f64; 3], pb: [f64; 3], w: [f64; 3]) -> Result<DVector<f64>> {
    let frame = local_frame(pa, pb, p.roll)?;
    let l = frame.length;
    Ok(match p.kind {
        ElementKind::Truss => {
            let half = [w[0] * l / 2.0, w[1] * l / 2.0, w[2] * l / 2.0];
            DVector::from_iterator(6, half.iter().chain(half.iter()).copied())
        }
        ElementKind::Beam => {
            let wl = frame.rotation * Vector3::new(w[0], w[1], w[2]);
            let m = l * l / 12.0;
            let local = DVector::from_row_slice(&[
                wl.x * l / 2.0,
                wl.y * l / 2.0,
                wl.z * l / 2.0,
                0.0,
                -wl.z * m,
                wl.y * m,
                wl.x * l / 2.0,
                wl.y * l / 2.0,
                wl.z * l / 2.0,
                0.0,
                wl.z * m,
                -wl.y * m,
            ]);
            transformation(&frame, p.kind).transpose() * local
        }
    })
}

/// Element mass `ρ·A·L`.
pub fn element_mass(p: &ElementProps, pa: [f64; 3], pb: [f64; 3]) -> f64 {
    let l = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2) + (pb[2] - pa[2]).powi(2)).sqrt();
    p.density * p.area * l
}

/// Lumped translational mass diagonal, half of the element mass per node.
pub fn lumped_mass_diagonal(p: &ElementProps, pa: [f64; 3], pb: [f64; 3]) -> DVector<f64> {
    let half = element_mass(p, pa, pb) / 2.0;
    let n = dof_count(p.kind);
    let per_node = n / 2;
    DVector::from_fn(n, |i, _| if i % per_node < 3 { half } else { 0.0 })
}

/// Gravity as lumped nodal forces from the element mass.
pub fn gravity_load_vector(p: &ElementProps, pa: [f64; 3], pb: [f64; 3], g: [f64; 3]) -> DVector<f64> {
    let half = element_mass(p, pa, pb) / 2.0;
    let n = dof_count(p.kind);
    let per_node = n / 2;
    DVector::from_fn(n, |i, _| {
        let slot = i % per_node;
        if slot < 3 {
            half * g[slot]
        } else {
            0.0
        }
    })
}

/// Stress measure of an element and its gradient with respect to the element
/// dofs.
///
/// Truss: `|N|/A`. Beam: the larger over both ends of
/// `|N|/A + |M_y|·c_z/I_yy + |M_z|·c_y/I_zz`, with end forces recovered as
/// `k·u − f_eq` so member loads are accounted for.
pub fn element_stress(
    p: &ElementProps,
    pa: [f64; 3],
    pb: [f64; 3],
    u: &DVector<f64>,
    equivalent_load: &DVector<f64>,
) -> Result<(f64, DVector<f64>)> {
    let frame = local_frame(pa, pb, p.roll)?;
    match p.kind {
        ElementKind::Truss => {
            let c = frame.rotation.row(0).transpose();
            let k = p.youngs_modulus / frame.length;
            let mut row = DVector::zeros(6);
            for i in 0..3 {
                row[i] = -k * c[i];
                row[i + 3] = k * c[i];
            }
            let stress = row.dot(u);
            Ok((stress.abs(), row * sign(stress)))
        }
        ElementKind::Beam => {
            let t = transformation(&frame, p.kind);
            let b = beam_local_stiffness(p, frame.length) * &t;
            let end_forces = &b * u - &t * equivalent_load;
            let mut best: Option<(f64, DVector<f64>)> = None;
            for (n_idx, my_idx, mz_idx) in [(0, 4, 5), (6, 10, 11)] {
                let (n, my, mz) = (end_forces[n_idx], end_forces[my_idx], end_forces[mz_idx]);
                let wn = 1.0 / p.area;
                let wy = p.fiber_z / p.iyy;
                let wz = p.fiber_y / p.izz;
                let value = n.abs() * wn + my.abs() * wy + mz.abs() * wz;
                if best.as_ref().is_none_or(|(v, _)| value > *v) {
                    let grad = b.row(n_idx).transpose() * (sign(n) * wn)
                        + b.row(my_idx).transpose() * (sign(my) * wy)
                        + b.row(mz_idx).transpose() * (sign(mz) * wz);
                    best = Some((value, grad));
                }
            }
            Ok(best.expect("two element ends"))
        }
    }
}

fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn props(kind: ElementKind) -> ElementProps {
        ElementProps {
            kind,
            area: 2.0,
            iyy: 3.0,
            izz: 5.0,
            torsion_constant: 1.5,
            youngs_modulus: 100.0,
            poisson_ratio: 0.3,
            density: 1.0,
            yield_stress: 10.0,
            fiber_y: 0.5,
            fiber_z: 0.7,
            roll: 0.0,
        }
    }

    #[test]
    fn frame_is_orthonormal() {
        for (pb, roll) in [([1.0, 2.0, 0.5], 0.3), ([0.0, 0.0, 4.0], 1.1), ([3.0, 0.0, 0.0], 0.0)] {
            let f = local_frame([0.0; 3], pb, roll).unwrap();
            let should_be_identity = f.rotation * f.rotation.transpose();
            assert_relative_eq!(should_be_identity, Matrix3::identity(), epsilon = 1e-14);
            assert_relative_eq!(f.rotation.determinant(), 1.0, epsilon = 1e-14);
        }
        assert!(local_frame([1.0; 3], [1.0; 3], 0.0).is_err());
    }

    #[test]
    fn truss_stiffness_linear_in_area() {
        let mut p = props(ElementKind::Truss);
        let k1 = element_stiffness(&p, [0.0; 3], [1.0, 2.0, 2.0]).unwrap();
        p.area *= 2.0;
        let k2 = element_stiffness(&p, [0.0; 3], [1.0, 2.0, 2.0]).unwrap();
        assert_relative_eq!(k1 * 2.0, k2, epsilon = 1e-12);
    }

    #[test]
    fn beam_stiffness_symmetric_with_six_rigid_modes() {
        let mut p = props(ElementKind::Beam);
        p.roll = 0.4;
        let k = element_stiffness(&p, [0.1, 0.2, 0.3], [1.3, -0.4, 2.0]).unwrap();
        assert_relative_eq!(k.clone(), k.transpose(), epsilon = 1e-10);
        let eig = k.symmetric_eigen();
        let max = eig.eigenvalues.amax();
        let zeros = eig.eigenvalues.iter().filter(|v| v.abs() < 1e-10 * max).count();
        assert_eq!(zeros, 6);
    }

    #[test]
    fn distributed_load_resultant() {
        let p = props(ElementKind::Beam);
        let f = distributed_load_vector(&p, [0.0; 3], [2.0, 0.0, 0.0], [0.0, 0.0, -3.0]).unwrap();
        assert_relative_eq!(f[2] + f[8], -6.0, epsilon = 1e-12);
        // end moments cancel
        assert_relative_eq!(f[4] + f[10], 0.0, epsilon = 1e-12);
        assert_relative_eq!(f[4].abs(), 3.0 * 4.0 / 12.0, epsilon = 1e-12);
    }

    #[test]
    fn axial_bar_stress() {
        let p = props(ElementKind::Truss);
        // stretch by 0.01 over length 2 → strain 0.005 → stress 0.5
        let u = DVector::from_row_slice(&[0.0, 0.0, 0.0, 0.01, 0.0, 0.0]);
        let (s, _) = element_stress(&p, [0.0; 3], [2.0, 0.0, 0.0], &u, &DVector::zeros(6)).unwrap();
        assert_relative_eq!(s, 0.5, epsilon = 1e-12);
        let (s0, _) = element_stress(&p, [0.0; 3], [2.0, 0.0, 0.0], &DVector::zeros(6), &DVector::zeros(6)).unwrap();
        assert_eq!(s0, 0.0);
    }
}
