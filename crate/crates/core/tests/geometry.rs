mod common;

use common::*;
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stochtri::features::cam_feature;
use stochtri::geometry::{
    decompose_to_pose, eight_point, eight_point_unnormalized, project, quat_weighted_average, ray_distance,
    symmetric_epipolar_distance, triangulate, Quaternion,
};
use stochtri::metrics::{camera_errors, probe_observations};
use stochtri::{Camera, Point2, Point3, RelativePose};

#[test]
fn projection_matches_homogeneous_multiply() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..200 {
        let cam = random_camera(i, &mut rng);
        let x = random_point(&mut rng, 800.0);
        let p = project(&cam, &x).unwrap();
        let q = project_oracle(&cam, &x);
        assert!((p - q).norm() < 1e-9, "{p} vs {q}");
    }
}

#[test]
fn triangulation_matches_reference_dlt_and_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let k = rng.random_range(2..6);
        let cams: Vec<Camera> = (0..k).map(|i| random_camera(i, &mut rng)).collect();
        let refs: Vec<&Camera> = cams.iter().collect();
        let x = random_point(&mut rng, 800.0);
        let obs: Vec<Point2> = cams.iter().map(|c| project_oracle(c, &x)).collect();
        let y = triangulate(&refs, &obs).unwrap();
        assert!((y - x).norm() < 1e-6);
        let noisy: Vec<Point2> = obs.iter().map(|o| o + gauss2(&mut rng, 2.0)).collect();
        let a = triangulate(&refs, &noisy).unwrap();
        let b = dlt_oracle(&refs, &noisy);
        // the oracle solves the squared system, so compare positions loosely
        // and algebraic residuals tightly
        assert!((a - b).norm() < 1e-2, "{a} vs {b}");
        let (ra, rb) = (algebraic_residual(&refs, &noisy, &a), algebraic_residual(&refs, &noisy, &b));
        assert!(ra <= rb * (1.0 + 1e-7), "{ra} vs {rb}");
    }
}

/// `‖A x̂‖` for the unit homogeneous vector of `x`.
fn algebraic_residual(cams: &[&Camera], obs: &[Point2], x: &Point3) -> f64 {
    let h = nalgebra::Vector4::new(x.x, x.y, x.z, 1.0).normalize();
    let mut r = 0.0;
    for (c, o) in cams.iter().zip(obs) {
        let p = c.projection();
        let row = |k: usize| (0..4).map(|j| p[(k, j)] * h[j]).sum::<f64>();
        r += (o.x * row(2) - row(0)).powi(2) + (o.y * row(2) - row(1)).powi(2);
    }
    r.sqrt()
}

#[test]
fn four_views_beat_the_best_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cams: Vec<Camera> = (0..4).map(|i| random_camera(i, &mut rng)).collect();
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
    let mut all_err = 0.0;
    let mut pair_err = vec![0.0; pairs.len()];
    for _ in 0..1000 {
        let x = random_point(&mut rng, 500.0);
        let obs: Vec<Point2> = cams.iter().map(|c| project_oracle(c, &x) + gauss2(&mut rng, 2.0)).collect();
        let refs: Vec<&Camera> = cams.iter().collect();
        all_err += (triangulate(&refs, &obs).unwrap() - x).norm();
        for (e, &(a, b)) in pair_err.iter_mut().zip(&pairs) {
            *e += (triangulate(&[&cams[a], &cams[b]], &[obs[a], obs[b]]).unwrap() - x).norm();
        }
    }
    let best_pair = pair_err.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(all_err < best_pair, "4 views {all_err} vs best pair {best_pair}");
}

fn pair(seed: u64) -> (Camera, Camera) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let a = random_camera(0, &mut rng);
        let b = random_camera(1, &mut rng);
        // keep pairs with a usable baseline and overlapping views
        let angle = angle_between(&(a.center() - center()), &(b.center() - center()));
        if angle > 0.3 && angle < 2.5 {
            return (a, b);
        }
    }
}

#[test]
fn fundamental_matrix_is_rank_two_and_unit_norm() {
    for seed in 0..50 {
        let (a, b) = pair(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, mut corrs) = correspondences(&a, &b, 40, &mut rng);
        if seed % 2 == 1 {
            for c in &mut corrs {
                c.0 += gauss2(&mut rng, 1.0);
                c.1 += gauss2(&mut rng, 1.0);
            }
        }
        let f = eight_point(&corrs).unwrap();
        let sv = f.singular_values();
        assert!(sv.min() < 1e-12 * sv.max(), "{sv}");
        assert!((f.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn noiseless_epipolar_residual_vanishes() {
    for seed in 0..30 {
        let (a, b) = pair(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let (_, corrs) = correspondences(&a, &b, 30, &mut rng);
        let f = eight_point(&corrs).unwrap();
        for (x1, x2) in &corrs {
            let r = Vector3::new(x2.x, x2.y, 1.0).dot(&(f * Vector3::new(x1.x, x1.y, 1.0)));
            assert!(r.abs() < 1e-9, "residual {r}");
        }
    }
}

#[test]
fn noiseless_decomposition_recovers_the_pose() {
    for seed in 0..50 {
        let (a, b) = pair(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 200);
        let (_, corrs) = correspondences(&a, &b, 20 + seed as usize, &mut rng);
        let truth = RelativePose::between(&a, &b);
        let baseline = (a.center() - b.center()).norm();
        let est = decompose_to_pose(&eight_point(&corrs).unwrap(), &a.intrinsics, &b.intrinsics, &corrs, baseline).unwrap();
        assert!(est.rotation.angle_to(&truth.rotation) < 1e-6);
        assert!(angle_between(&est.translation, &truth.translation) < 1e-6);
    }
}

#[test]
fn hartley_normalization_lowers_the_residual() {
    let mut wins = 0;
    let (mut norm_total, mut raw_total) = (0.0, 0.0);
    for seed in 0..20 {
        let (a, b) = pair(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 300);
        let (_, mut corrs) = correspondences(&a, &b, 100, &mut rng);
        for c in &mut corrs {
            c.0 += gauss2(&mut rng, 1.0);
            c.1 += gauss2(&mut rng, 1.0);
        }
        let mean = |f: &Matrix3<f64>| corrs.iter().map(|c| symmetric_epipolar_distance(f, c)).sum::<f64>() / corrs.len() as f64;
        let n = mean(&eight_point(&corrs).unwrap());
        let r = mean(&eight_point_unnormalized(&corrs).unwrap());
        norm_total += n;
        raw_total += r;
        wins += usize::from(n < r);
    }
    assert!(norm_total < raw_total, "normalized {norm_total} vs raw {raw_total}");
    assert!(wins >= 15, "normalized variant better on only {wins}/20 scenes");
}

/// The four `(R, ±t)` factorizations of `E = K2ᵀ F K1`.
fn candidate_rotations(f: &Matrix3<f64>, k1: &Matrix3<f64>, k2: &Matrix3<f64>) -> [Matrix3<f64>; 2] {
    let e = k2.transpose() * f * k1;
    let svd = e.svd(true, true);
    let (mut u, mut vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    if u.determinant() < 0.0 {
        u = -u;
    }
    if vt.determinant() < 0.0 {
        vt = -vt;
    }
    let w = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    [u * w * vt, u * w.transpose() * vt]
}

#[test]
fn cheirality_picks_the_candidate_nearest_truth_under_noise() {
    for seed in 0..100 {
        let (a, b) = pair(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 400);
        let (_, mut corrs) = correspondences(&a, &b, 160, &mut rng);
        for c in &mut corrs {
            c.0 += gauss2(&mut rng, 1.0);
            c.1 += gauss2(&mut rng, 1.0);
        }
        let truth = RelativePose::between(&a, &b);
        let r_true = truth.rotation_matrix();
        let f = eight_point(&corrs).unwrap();
        let est = decompose_to_pose(&f, &a.intrinsics, &b.intrinsics, &corrs, 1.0).unwrap();
        let cands = candidate_rotations(&f, &a.intrinsics, &b.intrinsics);
        let nearest = cands
            .iter()
            .min_by(|x, y| rotation_angle(x, &r_true).total_cmp(&rotation_angle(y, &r_true)))
            .unwrap();
        assert!((est.rotation_matrix() - nearest).norm() < 1e-9, "seed {seed}");
        assert!(est.translation.dot(&truth.translation) > 0.0, "seed {seed}: translation sign");
    }
}

/// Closest approach of two rays by nested ternary search over the line
/// parameters.
fn sampled_line_distance(p: Point3, u: Vector3<f64>, q: Point3, v: Vector3<f64>) -> f64 {
    let inner = |s: f64| {
        let a = p + u * s;
        let (mut lo, mut hi) = (-1e5, 1e5);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if (a - (q + v * m1)).norm() < (a - (q + v * m2)).norm() {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        (a - (q + v * (0.5 * (lo + hi)))).norm()
    };
    let (mut lo, mut hi) = (-1e5, 1e5);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if inner(m1) < inner(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    inner(0.5 * (lo + hi))
}

#[test]
fn ray_distance_matches_line_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..40 {
        let a = random_camera(0, &mut rng);
        let b = random_camera(1, &mut rng);
        let x = random_point(&mut rng, 500.0);
        let oa = project_oracle(&a, &x);
        let ob = project_oracle(&b, &x) + gauss2(&mut rng, 5.0);
        let d = ray_distance(&a, &oa, &b, &ob);
        let u = (a.rotation.transpose() * a.intrinsics.try_inverse().unwrap() * Vector3::new(oa.x, oa.y, 1.0)).normalize();
        let v = (b.rotation.transpose() * b.intrinsics.try_inverse().unwrap() * Vector3::new(ob.x, ob.y, 1.0)).normalize();
        let oracle = sampled_line_distance(a.center(), u, b.center(), v);
        assert!((d - oracle).abs() < 1e-6, "case {i}: {d} vs {oracle}");
    }
}

#[test]
fn rotating_the_hypothesis_increases_ray_distances() {
    let (a, b) = pair(7);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (_, corrs) = correspondences(&a, &b, 200, &mut rng);
    let truth = RelativePose::between(&a, &b);
    let mean = |p: &RelativePose| {
        let d = cam_feature(p, &a, &b.intrinsics, &corrs);
        d.iter().sum::<f64>() / d.len() as f64
    };
    let tilt = Quaternion::from_axis_angle(&Vector3::new(0.3, 1.0, -0.2), 1f64.to_radians());
    let r = tilt.to_matrix() * truth.rotation_matrix();
    let rotated = RelativePose {
        rotation: Quaternion::from_matrix(&r),
        translation: truth.translation,
    };
    assert!(mean(&truth) < 1e-6);
    assert!(mean(&rotated) > mean(&truth) + 1.0);
}

#[test]
fn quaternion_average_agrees_with_chordal_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let reference = Quaternion::from_axis_angle(&axis, rng.random_range(0.0..3.0));
        let qs: Vec<Quaternion> = (0..10)
            .map(|_| {
                let d = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let q = Quaternion::from_matrix(&(Quaternion::from_axis_angle(&d, rng.random_range(0.0..5f64.to_radians())).to_matrix() * reference.to_matrix()));
                if rng.random_bool(0.5) { q.negated() } else { q }
            })
            .collect();
        let avg = quat_weighted_average(&qs, &[0.1; 10]).unwrap();
        let sum: Matrix3<f64> = qs.iter().map(|q| q.to_matrix()).sum();
        let svd = sum.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let d = (u * vt).determinant().signum();
        let chordal = u * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * vt;
        assert!(avg.angle_to(&reference) < 5f64.to_radians());
        assert!(rotation_angle(&avg.to_matrix(), &chordal) < 0.1f64.to_radians());
    }
}

#[test]
fn translation_error_along_baseline() {
    let (a, b) = pair(11);
    let truth = RelativePose::between(&a, &b);
    let dir = truth.translation.normalize();
    let est = RelativePose {
        rotation: truth.rotation,
        translation: truth.translation + dir * 10.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let probes: Vec<Point3> = (0..50).map(|_| random_point(&mut rng, 300.0)).collect();
    let e = camera_errors(&est, &truth, &a, &b, &probes).unwrap();
    assert_eq!(e.rotation, 0.0);
    assert!((e.translation - 10.0).abs() < 1e-9);
    let est_cam = est.target_camera(&a, b.intrinsics, 1);
    let obs = probe_observations(&a, &b, &probes).unwrap();
    let oracle = probes
        .iter()
        .zip(&obs)
        .map(|(x, (p, q))| (dlt_oracle(&[&a, &est_cam], &[*p, *q]) - x).norm())
        .sum::<f64>()
        / probes.len() as f64;
    assert!((e.reconstruction_3d - oracle).abs() < 1e-6 * oracle.max(1.0), "{} vs {oracle}", e.reconstruction_3d);
    assert!(e.reconstruction_3d > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ray_distance_is_symmetric(seed in any::<u64>(), sigma in 0.0f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_camera(0, &mut rng);
        let b = random_camera(1, &mut rng);
        let x = random_point(&mut rng, 500.0);
        let oa = project_oracle(&a, &x) + gauss2(&mut rng, sigma);
        let ob = project_oracle(&b, &x) + gauss2(&mut rng, sigma);
        prop_assert!((ray_distance(&a, &oa, &b, &ob) - ray_distance(&b, &ob, &a, &oa)).abs() <= 1e-12);
    }

    #[test]
    fn quaternion_average_ignores_sign_flips(seed in any::<u64>(), flips in prop::collection::vec(any::<bool>(), 6)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = Quaternion::from_axis_angle(&Vector3::new(0.2, -0.5, 1.0), rng.random_range(0.0..3.0));
        let qs: Vec<Quaternion> = (0..6)
            .map(|_| {
                let d = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 1.0);
                Quaternion::from_matrix(&(Quaternion::from_axis_angle(&d, rng.random_range(0.0..0.3)).to_matrix() * base.to_matrix()))
            })
            .collect();
        let w: Vec<f64> = (0..6).map(|_| rng.random_range(0.01..1.0)).collect();
        let flipped: Vec<Quaternion> = qs.iter().zip(&flips).map(|(q, &f)| if f { q.negated() } else { *q }).collect();
        let a = quat_weighted_average(&qs, &w).unwrap();
        let b = quat_weighted_average(&flipped, &w).unwrap();
        let d = (0..4).map(|i| [a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z][i].abs()).fold(0.0, f64::max);
        let e = (0..4).map(|i| [a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z][i].abs()).fold(0.0, f64::max);
        prop_assert!(d.min(e) < 1e-12, "{:?} vs {:?}", a, b);
    }

    #[test]
    fn noiseless_triangulation_round_trip(seed in any::<u64>(), views in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cams: Vec<Camera> = (0..views).map(|i| random_camera(i, &mut rng)).collect();
        let x = random_point(&mut rng, 800.0);
        let obs: Vec<Point2> = cams.iter().map(|c| project_oracle(c, &x)).collect();
        let y = triangulate(&cams.iter().collect::<Vec<_>>(), &obs).unwrap();
        prop_assert!((y - x).norm() < 1e-6);
    }
}
