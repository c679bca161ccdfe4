use nalgebra::Vector3;

use super::{Camera, Point2, Point3};

/// Minimum distance between the back-projected lines of two observations (mm).
///
/// Skew lines use the common-perpendicular formula; (near) parallel lines
/// fall back to the perpendicular distance between them. The arguments are
/// put into a canonical order first so the result is exactly symmetric.
pub fn ray_distance(cam_a: &Camera, obs_a: &Point2, cam_b: &Camera, obs_b: &Point2) -> f64 {
    let a = (cam_a.center(), cam_a.ray_direction(obs_a).normalize());
    let b = (cam_b.center(), cam_b.ray_direction(obs_b).normalize());
    let key = |r: &(Point3, Vector3<f64>)| [r.0.x, r.0.y, r.0.z, r.1.x, r.1.y, r.1.z];
    let (first, second) = if key(&a)
        .iter()
        .zip(key(&b).iter())
        .find(|(x, y)| x != y)
        .is_some_and(|(x, y)| x > y)
    {
        (b, a)
    } else {
        (a, b)
    };
    line_distance(&first.0, &first.1, &second.0, &second.1)
}

/// Distance between lines `p + s u` and `q + t v` with unit directions.
pub(crate) fn line_distance(p: &Point3, u: &Vector3<f64>, q: &Point3, v: &Vector3<f64>) -> f64 {
    let w = q - p;
    let n = u.cross(v);
    let n_norm = n.norm();
    if n_norm < 1e-12 {
        w.cross(u).norm()
    } else {
        (w.dot(&n) / n_norm).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{intrinsics, project};
    use nalgebra::Matrix3;

    #[test]
    fn intersecting_rays_have_zero_distance() {
        let k = intrinsics(1000.0, 500.0, 500.0);
        let target = Point3::new(0.0, 0.0, 1000.0);
        let a = Camera::look_at(0, k, Point3::new(3000.0, 0.0, 1000.0), target);
        let b = Camera::look_at(1, k, Point3::new(0.0, 3000.0, 1400.0), target);
        let x = Point3::new(120.0, -40.0, 1300.0);
        let d = ray_distance(&a, &project(&a, &x).unwrap(), &b, &project(&b, &x).unwrap());
        assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn parallel_axes_give_baseline() {
        let k = intrinsics(1000.0, 500.0, 500.0);
        let a = Camera::new(0, k, Matrix3::identity(), Vector3::zeros());
        let b = Camera::new(1, k, Matrix3::identity(), Vector3::new(-250.0, 0.0, 0.0));
        let px = Point2::new(500.0, 500.0);
        assert!((ray_distance(&a, &px, &b, &px) - 250.0).abs() < 1e-9);
    }
}
