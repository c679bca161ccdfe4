use nalgebra::{DMatrix, Matrix3x4};

use super::{Camera, Point2, Point3};
use crate::error::{Error, Result};

/// Ratio of the two trailing singular values to the largest one below which
/// the stacked system has a multi-dimensional null space.
const DEGENERATE_RATIO: f64 = 1e-8;

/// Homogeneous DLT triangulation from two or more calibrated views.
pub fn triangulate(cameras: &[&Camera], observations: &[Point2]) -> Result<Point3> {
    if cameras.len() != observations.len() {
        return Err(Error::LengthMismatch {
            left: cameras.len(),
            right: observations.len(),
        });
    }
    let projections: Vec<Matrix3x4<f64>> = cameras.iter().map(|c| c.projection()).collect();
    triangulate_projections(&projections, observations)
}

/// DLT over raw 3×4 projection matrices.
pub fn triangulate_projections(projections: &[Matrix3x4<f64>], observations: &[Point2]) -> Result<Point3> {
    let n = projections.len();
    if n < 2 {
        return Err(Error::InsufficientViews(n));
    }
    if observations.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: observations.len(),
        });
    }
    let mut a = DMatrix::<f64>::zeros(2 * n, 4);
    for (i, (p, x)) in projections.iter().zip(observations).enumerate() {
        let r0 = p.row(0);
        let r1 = p.row(1);
        let r2 = p.row(2);
        a.row_mut(2 * i).copy_from(&(r2 * x.x - r0));
        a.row_mut(2 * i + 1).copy_from(&(r2 * x.y - r1));
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    // singular values come sorted in descending order
    let largest = svd.singular_values[0];
    let second_smallest = svd.singular_values[2];
    let ratio = if largest > 0.0 { second_smallest / largest } else { 0.0 };
    if ratio < DEGENERATE_RATIO {
        return Err(Error::DegenerateGeometry { ratio });
    }
    let v = v_t.row(3);
    if v[3].abs() < f64::EPSILON * v.norm() {
        return Err(Error::DegenerateGeometry { ratio: 0.0 });
    }
    Ok(Point3::new(v[0] / v[3], v[1] / v[3], v[2] / v[3]))
}
