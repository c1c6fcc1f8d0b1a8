//! Closed-form properties of common solid and thin-walled profiles.
//!
//! Local axes: `h` is the depth along local z, `w` the width along local y.
//! `iyy` resists bending in the local x-z plane, `izz` in the local x-y plane.

use std::f64::consts::PI;

use crate::fem::CrossSection;

/// Solid circle of radius `r`.
pub fn solid_circle(name: &str, r: f64) -> CrossSection {
    let i = PI * r.powi(4) / 4.0;
    CrossSection {
        name: name.into(),
        area: PI * r * r,
        iyy: i,
        izz: i,
        torsion_constant: 2.0 * i,
        max_fiber_distance_y: r,
        max_fiber_distance_z: r,
    }
}

/// Circular tube with outer radius `r` and wall `t`.
pub fn tube(name: &str, r: f64, t: f64) -> CrossSection {
    let ri = r - t;
    let i = PI * (r.powi(4) - ri.powi(4)) / 4.0;
    CrossSection {
        name: name.into(),
        area: PI * (r * r - ri * ri),
        iyy: i,
        izz: i,
        torsion_constant: 2.0 * i,
        max_fiber_distance_y: r,
        max_fiber_distance_z: r,
    }
}

/// Saint-Venant torsion constant of a solid rectangle (series approximation).
fn rectangle_torsion(h: f64, w: f64) -> f64 {
    let (a, b) = if h >= w { (h, w) } else { (w, h) };
    a * b.powi(3) * (1.0 / 3.0 - 0.21 * (b / a) * (1.0 - b.powi(4) / (12.0 * a.powi(4))))
}

/// Solid rectangle, depth `h`, width `w`.
pub fn rectangle(name: &str, h: f64, w: f64) -> CrossSection {
    CrossSection {
        name: name.into(),
        area: h * w,
        iyy: w * h.powi(3) / 12.0,
        izz: h * w.powi(3) / 12.0,
        torsion_constant: rectangle_torsion(h, w),
        max_fiber_distance_y: w / 2.0,
        max_fiber_distance_z: h / 2.0,
    }
}

/// Rectangular hollow section with uniform wall `t` (thin-walled torsion).
pub fn box_section(name: &str, h: f64, w: f64, t: f64) -> CrossSection {
    let (hi, wi) = (h - 2.0 * t, w - 2.0 * t);
    let (hm, wm) = (h - t, w - t);
    CrossSection {
        name: name.into(),
        area: h * w - hi * wi,
        iyy: (w * h.powi(3) - wi * hi.powi(3)) / 12.0,
        izz: (h * w.powi(3) - hi * wi.powi(3)) / 12.0,
        torsion_constant: 2.0 * t * wm * wm * hm * hm / (wm + hm),
        max_fiber_distance_y: w / 2.0,
        max_fiber_distance_z: h / 2.0,
    }
}

/// Doubly symmetric I-section with flange width `w` and uniform thickness `t`.
pub fn i_beam(name: &str, h: f64, w: f64, t: f64) -> CrossSection {
    let web = h - 2.0 * t;
    CrossSection {
        name: name.into(),
        area: 2.0 * w * t + web * t,
        iyy: (w * h.powi(3) - (w - t) * web.powi(3)) / 12.0,
        izz: 2.0 * t * w.powi(3) / 12.0 + web * t.powi(3) / 12.0,
        torsion_constant: (2.0 * w * t.powi(3) + web * t.powi(3)) / 3.0,
        max_fiber_distance_y: w / 2.0,
        max_fiber_distance_z: h / 2.0,
    }
}

/// Channel with flange width `w` and uniform thickness `t`; `izz` is taken
/// about the centroidal axis parallel to the web.
pub fn channel(name: &str, h: f64, w: f64, t: f64) -> CrossSection {
    let web = h - 2.0 * t;
    let area = 2.0 * w * t + web * t;
    // centroid measured from the back of the web
    let c = (2.0 * w * t * (w / 2.0) + web * t * (t / 2.0)) / area;
    let izz = 2.0 * (t * w.powi(3) / 12.0 + w * t * (w / 2.0 - c).powi(2))
        + (web * t.powi(3) / 12.0 + web * t * (t / 2.0 - c).powi(2));
    CrossSection {
        name: name.into(),
        area,
        iyy: (w * h.powi(3) - (w - t) * web.powi(3)) / 12.0,
        izz,
        torsion_constant: (2.0 * w * t.powi(3) + web * t.powi(3)) / 3.0,
        max_fiber_distance_y: c.max(w - c),
        max_fiber_distance_z: h / 2.0,
    }
}
