//! Exact polygon quantities via signed-area decompositions.

use crate::error::{PcvtError, Result};
use crate::vec2::Vec2;

fn check(poly: &[Vec2]) -> Result<()> {
    if poly.len() < 3 {
        return Err(PcvtError::DegeneratePolygon(format!(
            "{} vertices",
            poly.len()
        )));
    }
    Ok(())
}

/// Signed area (positive for counter-clockwise vertex order).
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let mut acc = 0.0;
    for (k, &p) in poly.iter().enumerate() {
        let q = poly[(k + 1) % poly.len()];
        acc += p.cross(q);
    }
    0.5 * acc
}

/// Area of a simple CCW polygon.
pub fn polygon_area(poly: &[Vec2]) -> Result<f64> {
    check(poly)?;
    let a = signed_area(poly);
    if a <= 0.0 {
        return Err(PcvtError::DegeneratePolygon(format!("signed area {a}")));
    }
    Ok(a)
}

/// Centroid of a simple CCW polygon.
pub fn polygon_centroid(poly: &[Vec2]) -> Result<Vec2> {
    check(poly)?;
    let mut acc = Vec2::ZERO;
    let mut area = 0.0;
    for (k, &p) in poly.iter().enumerate() {
        let q = poly[(k + 1) % poly.len()];
        let w = p.cross(q);
        area += w;
        acc += (p + q) * w;
    }
    if area <= 0.0 {
        return Err(PcvtError::DegeneratePolygon(format!("signed area {}", 0.5 * area)));
    }
    Ok(acc / (3.0 * area))
}

/// Perimeter of a polygon.
pub fn polygon_perimeter(poly: &[Vec2]) -> Result<f64> {
    check(poly)?;
    let mut acc = 0.0;
    for (k, &p) in poly.iter().enumerate() {
        let q = poly[(k + 1) % poly.len()];
        acc += (q - p).norm();
    }
    Ok(acc)
}

/// Exact second moment of a polygon about a point:
/// the integral of squared distance to `point` over the polygon interior.
///
/// Computed by fanning signed triangles out of `point`; each triangle's
/// moment is closed-form, so the result is exact for any simple CCW polygon
/// whether or not `point` lies inside it.
pub fn polygon_second_moment(poly: &[Vec2], point: Vec2) -> Result<f64> {
    check(poly)?;
    Ok(second_moment_unchecked(poly, point))
}

pub(crate) fn second_moment_unchecked(poly: &[Vec2], point: Vec2) -> f64 {
    let mut acc = 0.0;
    for (k, &pv) in poly.iter().enumerate() {
        let qv = poly[(k + 1) % poly.len()];
        let p = pv - point;
        let q = qv - point;
        // Signed triangle (point, pv, qv): integral of |y - point|^2 equals
        // area/6 * (p.p + p.q + q.q).
        let twice_area = p.cross(q);
        acc += twice_area * (p.norm_sq() + p.dot(q) + q.norm_sq());
    }
    acc / 12.0
}

/// Isoperimetric ratio: perimeter squared over area (dimensionless, at
/// least 4*pi by the isoperimetric inequality; 8*sqrt(3) for the regular
/// hexagon).
pub fn isoperimetric_ratio(perimeter: f64, area: f64) -> f64 {
    perimeter * perimeter / area
}

/// Isoperimetric ratio of the regular hexagon.
pub const R_HEX: f64 = 13.856406460551018; // 8 * sqrt(3)

/// Whether the CCW polygon is convex within a relative tolerance on the
/// corner cross products.
pub fn is_convex(poly: &[Vec2], rel_tol: f64) -> bool {
    if poly.len() < 3 {
        return false;
    }
    let scale: f64 = poly
        .iter()
        .enumerate()
        .map(|(k, &p)| (poly[(k + 1) % poly.len()] - p).norm_sq())
        .fold(0.0, f64::max);
    let n = poly.len();
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let c = poly[(k + 2) % n];
        if (b - a).cross(c - b) < -rel_tol * scale {
            return false;
        }
    }
    true
}

/// Vertices of a regular hexagon with the given inscribed-circle diameter,
/// centered at the origin with a flat side facing +x.
pub fn regular_hexagon(inscribed_diameter: f64) -> Vec<Vec2> {
    let circumradius = inscribed_diameter / f64::sqrt(3.0);
    (0..6)
        .map(|k| {
            let theta = std::f64::consts::FRAC_PI_6 + f64::from(k) * std::f64::consts::FRAC_PI_3;
            Vec2::new(circumradius * theta.cos(), circumradius * theta.sin())
        })
        .collect()
}
