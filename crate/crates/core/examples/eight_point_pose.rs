//! Recovers the relative pose of a camera pair with the normalized
//! eight-point algorithm, first from exact and then from noisy
//! correspondences, and reports the camera errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use stochtri::geometry::{decompose_to_pose, eight_point, project, symmetric_epipolar_distance, Correspondence};
use stochtri::metrics::{camera_errors, probe_points};
use stochtri::synth::RigSpec;
use stochtri::{Point2, Point3, RelativePose};

fn main() -> stochtri::Result<()> {
    let cams = RigSpec::ring(4).with_seed(2).build()?;
    let (a, b) = (&cams[0], &cams[1]);
    let truth = RelativePose::between(a, b);
    let baseline = (a.center() - b.center()).norm();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let center = Point3::new(0.0, 0.0, 900.0);
    let points = probe_points(&[a, b], &center, 800.0, 300, &mut rng);
    let exact: Vec<Correspondence> = points
        .iter()
        .map(|x| Ok((project(a, x)?, project(b, x)?)))
        .collect::<stochtri::Result<_>>()?;
    let probes = probe_points(&[a, b], &center, 1000.0, 100, &mut rng);

    for sigma in [0.0, 1.0, 3.0] {
        let mut jitter = || Point2::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * sigma;
        let corrs: Vec<Correspondence> = exact.iter().map(|(p, q)| (p + jitter(), q + jitter())).collect();
        let f = eight_point(&corrs)?;
        let residual = corrs.iter().map(|c| symmetric_epipolar_distance(&f, c)).sum::<f64>() / corrs.len() as f64;
        let est = decompose_to_pose(&f, &a.intrinsics, &b.intrinsics, &corrs, baseline)?;
        let e = camera_errors(&est, &truth, a, b, &probes)?;
        println!(
            "sigma {sigma:.0} px: epipolar residual {residual:.3} px, E_R {:.2e} rad, E_t {:.2} mm, E_2D {:.2} px, E_3D {:.2} mm",
            e.rotation, e.translation, e.reprojection_2d, e.reconstruction_3d
        );
    }
    Ok(())
}
