use nalgebra::{DMatrix, Matrix3, Matrix3x4, Vector3};
use serde::{Deserialize, Serialize};

use super::{triangulate_projections, Camera, Point2, Quaternion};
use crate::error::{Error, Result};

/// A 2D-2D correspondence: `.0` in the reference view, `.1` in the target view.
pub type Correspondence = (Point2, Point2);

const SIGMA8_MIN: f64 = 1e-10;

/// Rigid motion taking reference-camera coordinates to target-camera
/// coordinates: `X_target = R X_ref + t` (millimeters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativePose {
    pub rotation: Quaternion,
    pub translation: Vector3<f64>,
}

impl RelativePose {
    /// Ground-truth relative pose between two cameras.
    pub fn between(reference: &Camera, target: &Camera) -> Self {
        let r = target.rotation * reference.rotation.transpose();
        let t = target.translation - r * reference.translation;
        Self {
            rotation: Quaternion::from_matrix(&r),
            translation: t,
        }
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.rotation.to_matrix()
    }

    /// The target camera implied by this pose relative to `reference`.
    pub fn target_camera(&self, reference: &Camera, intrinsics: Matrix3<f64>, id: usize) -> Camera {
        let r = self.rotation_matrix();
        Camera::new(
            id,
            intrinsics,
            r * reference.rotation,
            r * reference.translation + self.translation,
        )
    }
}

fn hartley_transform(points: impl Iterator<Item = Point2> + Clone) -> Option<Matrix3<f64>> {
    let n = points.clone().count() as f64;
    let centroid = points.clone().fold(Point2::zeros(), |acc, p| acc + p) / n;
    let mean_dist = points.map(|p| (p - centroid).norm()).sum::<f64>() / n;
    if !(mean_dist > 0.0) {
        return None;
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Some(Matrix3::new(s, 0.0, -s * centroid.x, 0.0, s, -s * centroid.y, 0.0, 0.0, 1.0))
}

fn apply(t: &Matrix3<f64>, p: &Point2) -> Point2 {
    let h = t * Vector3::new(p.x, p.y, 1.0);
    Point2::new(h.x / h.z, h.y / h.z)
}

/// Linear solve of `x2ᵀ F x1 = 0` followed by rank-2 projection.
fn solve_linear(corrs: &[Correspondence]) -> Result<Matrix3<f64>> {
    if corrs.len() < 8 {
        return Err(Error::NotEnoughCorrespondences(corrs.len()));
    }
    // pad to 9 rows so the SVD exposes the full right null space
    let rows = corrs.len().max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (p1, p2)) in corrs.iter().enumerate() {
        let (x, y, xp, yp) = (p1.x, p1.y, p2.x, p2.y);
        let row = [xp * x, xp * y, xp, yp * x, yp * y, yp, x, y, 1.0];
        for (j, v) in row.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    let svd = a.svd(false, true);
    let sigma8 = svd.singular_values[7];
    if !(sigma8 >= SIGMA8_MIN) {
        return Err(Error::DegenerateConfiguration { sigma8 });
    }
    let f = svd.v_t.expect("v_t requested").row(8).clone_owned();
    let f = Matrix3::from_row_slice(f.as_slice());
    Ok(enforce_rank2(&f))
}

fn enforce_rank2(f: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = f.svd(true, true);
    let mut s = svd.singular_values;
    s[2] = 0.0;
    svd.u.unwrap() * Matrix3::from_diagonal(&s) * svd.v_t.unwrap()
}

/// Normalized eight-point algorithm. Correspondences are translated and
/// scaled (mean distance √2) in each image before the linear solve.
/// The returned matrix has rank 2 and unit Frobenius norm.
pub fn eight_point(corrs: &[Correspondence]) -> Result<Matrix3<f64>> {
    if corrs.len() < 8 {
        return Err(Error::NotEnoughCorrespondences(corrs.len()));
    }
    let degenerate = Error::DegenerateConfiguration { sigma8: 0.0 };
    let t1 = hartley_transform(corrs.iter().map(|c| c.0)).ok_or(degenerate)?;
    let t2 = hartley_transform(corrs.iter().map(|c| c.1)).ok_or(Error::DegenerateConfiguration { sigma8: 0.0 })?;
    let normalized: Vec<Correspondence> = corrs.iter().map(|(a, b)| (apply(&t1, a), apply(&t2, b))).collect();
    let f = solve_linear(&normalized)?;
    let f = t2.transpose() * f * t1;
    Ok(f / f.norm())
}

/// Eight-point solve on raw pixel coordinates (no conditioning).
pub fn eight_point_unnormalized(corrs: &[Correspondence]) -> Result<Matrix3<f64>> {
    let f = solve_linear(corrs)?;
    Ok(f / f.norm())
}

/// Symmetric epipolar distance of one correspondence, in pixels.
pub fn symmetric_epipolar_distance(f: &Matrix3<f64>, c: &Correspondence) -> f64 {
    let x1 = Vector3::new(c.0.x, c.0.y, 1.0);
    let x2 = Vector3::new(c.1.x, c.1.y, 1.0);
    let l2 = f * x1;
    let l1 = f.transpose() * x2;
    let r = x2.dot(&l2);
    (r * r / (l2.x * l2.x + l2.y * l2.y) + r * r / (l1.x * l1.x + l1.y * l1.y)).sqrt()
}

/// Number of probes in front of both cameras for candidate `(r, t)`,
/// working in normalized image coordinates.
fn cheirality_count(r: &Matrix3<f64>, t: &Vector3<f64>, probes: &[(Vector3<f64>, Vector3<f64>)]) -> usize {
    let p1 = Matrix3x4::identity();
    let mut p2 = Matrix3x4::zeros();
    p2.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    p2.set_column(3, t);
    probes
        .iter()
        .filter(|(y1, y2)| {
            let obs = [Point2::new(y1.x / y1.z, y1.y / y1.z), Point2::new(y2.x / y2.z, y2.y / y2.z)];
            match triangulate_projections(&[p1, p2], &obs) {
                Ok(x) => x.z > 0.0 && (r * x + t).z > 0.0,
                Err(_) => false,
            }
        })
        .count()
}

/// Decomposes a fundamental matrix into the relative pose of the target view.
///
/// The essential matrix `E = K2ᵀ F K1` yields four `(R, t)` candidates; the
/// one placing a strict majority of the probe correspondences at positive
/// depth in both views is kept. The unit translation is rescaled to
/// `baseline` millimeters.
pub fn decompose_to_pose(
    f: &Matrix3<f64>,
    k1: &Matrix3<f64>,
    k2: &Matrix3<f64>,
    probe_corrs: &[Correspondence],
    baseline: f64,
) -> Result<RelativePose> {
    if probe_corrs.is_empty() {
        return Err(Error::CheiralityAmbiguous);
    }
    let e = k2.transpose() * f * k1;
    let svd = e.svd(true, true);
    let mut u = svd.u.unwrap();
    let mut v_t = svd.v_t.unwrap();
    if u.determinant() < 0.0 {
        u = -u;
    }
    if v_t.determinant() < 0.0 {
        v_t = -v_t;
    }
    let w = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let ra = u * w * v_t;
    let rb = u * w.transpose() * v_t;
    let t: Vector3<f64> = u.column(2).into_owned();

    let k1_inv = k1.try_inverse().ok_or(Error::CheiralityAmbiguous)?;
    let k2_inv = k2.try_inverse().ok_or(Error::CheiralityAmbiguous)?;
    let probes: Vec<(Vector3<f64>, Vector3<f64>)> = probe_corrs
        .iter()
        .map(|(a, b)| (k1_inv * Vector3::new(a.x, a.y, 1.0), k2_inv * Vector3::new(b.x, b.y, 1.0)))
        .collect();

    let candidates = [(ra, t), (ra, -t), (rb, t), (rb, -t)];
    let (best, count) = candidates
        .iter()
        .map(|(r, t)| cheirality_count(r, t, &probes))
        .enumerate()
        .max_by_key(|&(i, c)| (c, std::cmp::Reverse(i)))
        .expect("four candidates");
    if 2 * count <= probes.len() {
        return Err(Error::CheiralityAmbiguous);
    }
    let (r, t) = candidates[best];
    Ok(RelativePose {
        rotation: Quaternion::from_matrix(&r),
        translation: t.normalize() * baseline,
    })
}

/// Fundamental matrix of a calibrated pair (reference → target).
pub fn fundamental_from_cameras(reference: &Camera, target: &Camera) -> Matrix3<f64> {
    let rel = RelativePose::between(reference, target);
    let t = rel.translation;
    let tx = Matrix3::new(0.0, -t.z, t.y, t.z, 0.0, -t.x, -t.y, t.x, 0.0);
    let e = tx * rel.rotation_matrix();
    let f = target.intrinsics.try_inverse().unwrap().transpose() * e * reference.intrinsics.try_inverse().unwrap();
    f / f.norm()
}
