//! Scene builders and independent reference implementations shared by the
//! integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix3, Vector3, Vector4};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use stochtri::geometry::{intrinsics, Correspondence};
use stochtri::synth::{generate_dataset, Dataset, NoiseSpec, RigSpec, SynthSpec};
use stochtri::{Camera, Point2, Point3, Skeleton};

pub const CENTER: [f64; 3] = [0.0, 0.0, 900.0];

pub fn center() -> Point3 {
    Point3::from(CENTER)
}

/// Camera 3 to 6 m from the capture center, looking at a jittered point
/// near it.
pub fn random_camera(id: usize, rng: &mut ChaCha8Rng) -> Camera {
    let az = rng.random_range(0.0..std::f64::consts::TAU);
    let dist = rng.random_range(3000.0..6000.0);
    let height = rng.random_range(300.0..2500.0);
    let pos = Point3::new(dist * az.cos(), dist * az.sin(), height);
    let look = center() + Point3::new(rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0), 0.0);
    let k = intrinsics(rng.random_range(800.0..1500.0), 500.0, 500.0);
    Camera::look_at(id, k, pos, look)
}

/// Uniform point in a cube of half-side `half` around the capture center.
pub fn random_point(rng: &mut ChaCha8Rng, half: f64) -> Point3 {
    center() + Point3::new(rng.random_range(-half..half), rng.random_range(-half..half), rng.random_range(-half..half))
}

pub fn gauss2(rng: &mut ChaCha8Rng, sigma: f64) -> Point2 {
    Point2::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * sigma
}

/// `K (R X + t)` by explicit homogeneous arithmetic.
pub fn project_oracle(cam: &Camera, x: &Point3) -> Point2 {
    let mut p = [[0.0; 4]; 3];
    for r in 0..3 {
        for c in 0..3 {
            p[r][c] = (0..3).map(|k| cam.intrinsics[(r, k)] * cam.rotation[(k, c)]).sum();
        }
        p[r][3] = (0..3).map(|k| cam.intrinsics[(r, k)] * cam.translation[k]).sum();
    }
    let h = [x.x, x.y, x.z, 1.0];
    let v: Vec<f64> = (0..3).map(|r| (0..4).map(|c| p[r][c] * h[c]).sum()).collect();
    Point2::new(v[0] / v[2], v[1] / v[2])
}

/// Reference DLT: unit null vector of the stacked `x p3ᵀ − p1ᵀ` rows,
/// through the eigen decomposition of `AᵀA`.
pub fn dlt_oracle(cams: &[&Camera], obs: &[Point2]) -> Point3 {
    let mut a = DMatrix::zeros(2 * cams.len(), 4);
    for (i, (c, o)) in cams.iter().zip(obs).enumerate() {
        let p = c.projection();
        for k in 0..4 {
            a[(2 * i, k)] = o.x * p[(2, k)] - p[(0, k)];
            a[(2 * i + 1, k)] = o.y * p[(2, k)] - p[(1, k)];
        }
    }
    let ata = a.transpose() * &a;
    let eig = ata.symmetric_eigen();
    let i = eig.eigenvalues.imin();
    let v: Vector4<f64> = eig.eigenvectors.column(i).into_owned().fixed_rows::<4>(0).into_owned();
    Point3::new(v[0] / v[3], v[1] / v[3], v[2] / v[3])
}

/// Exact correspondences of random points seen by both cameras.
pub fn correspondences(a: &Camera, b: &Camera, n: usize, rng: &mut ChaCha8Rng) -> (Vec<Point3>, Vec<Correspondence>) {
    let mut pts = Vec::with_capacity(n);
    let mut corrs = Vec::with_capacity(n);
    while pts.len() < n {
        let x = random_point(rng, 800.0);
        let (pa, pb) = (project_oracle(a, &x), project_oracle(b, &x));
        if a.depth(&x) > 0.0 && b.depth(&x) > 0.0 && a.in_image(&pa) && b.in_image(&pb) {
            pts.push(x);
            corrs.push((pa, pb));
        }
    }
    (pts, corrs)
}

/// Rotation angle of `Rᵀ S` (radians).
pub fn rotation_angle(r: &Matrix3<f64>, s: &Matrix3<f64>) -> f64 {
    (((r.transpose() * s).trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
}

pub fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    (a.dot(b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos()
}

pub fn dataset(rig: RigSpec, frames: usize, motion_seed: u64, noise: NoiseSpec) -> Dataset {
    generate_dataset(&SynthSpec { rig, frames, motion_seed, noise }, &Skeleton::human17()).unwrap()
}

/// Gaussian noise plus 10% outliers of 40 px.
pub fn outlier_noise(seed: u64) -> NoiseSpec {
    NoiseSpec {
        outlier_rate: 0.1,
        outlier_magnitude: 40.0,
        ..NoiseSpec::gaussian(3.0, seed)
    }
}

pub mod gradcheck {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use stochtri::scorer::{gumbel_softmax, GumbelConfig, ScoringNetwork, Task};
    use stochtri::select::{entropy_grad, entropy_loss, stochastic_loss, total_loss, weighted_pose_error_grad, LossWeights};
    use stochtri::Point3;

    /// A random small network with a pool of features, per-hypothesis
    /// errors, candidate poses and loss weights.
    pub struct Problem {
        pub net: ScoringNetwork,
        pub features: Vec<Vec<f64>>,
        pub errors: Vec<f64>,
        pub poses: Vec<Vec<Point3>>,
        pub truth: Vec<Point3>,
        pub weights: LossWeights,
        pub gumbel: GumbelConfig,
        pub noise_seed: u64,
    }

    impl Problem {
        pub fn random(seed: u64, hidden: &[usize], input: usize, pool: usize) -> Self {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut net = ScoringNetwork::new(Task::Pose, input, hidden, 1.0, seed);
            for l in &mut net.layers {
                l.bias.iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
            }
            let joints = 3;
            let pt = |rng: &mut ChaCha8Rng| Point3::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
            Self {
                net,
                features: (0..pool).map(|_| (0..input).map(|_| rng.random_range(-1.0..1.0)).collect()).collect(),
                errors: (0..pool).map(|_| rng.random_range(0.0..100.0)).collect(),
                poses: (0..pool).map(|_| (0..joints).map(|_| pt(&mut rng)).collect()).collect(),
                truth: (0..joints).map(|_| pt(&mut rng)).collect(),
                weights: LossWeights {
                    alpha: rng.random_range(0.0..1.0),
                    beta: rng.random_range(0.0..1.0),
                    gamma: rng.random_range(0.0..1.0),
                },
                gumbel: GumbelConfig::new(rng.random_range(0.5..2.0), true).unwrap(),
                noise_seed: rng.random(),
            }
        }

        /// Total loss at the current parameters.
        pub fn loss(&self) -> f64 {
            let logits = self.net.score_pool(&self.features).unwrap();
            let p = gumbel_softmax(&logits, &self.gumbel, self.noise_seed).probs;
            let poses: Vec<&[Point3]> = self.poses.iter().map(Vec::as_slice).collect();
            let (est, _) = weighted_pose_error_grad(&poses, &p, &self.truth).unwrap();
            total_loss(stochastic_loss(&self.errors, &p).unwrap(), entropy_loss(&p), est, &self.weights)
        }

        /// Analytic gradient through the Gumbel-Softmax and the network.
        pub fn gradient(&mut self) -> Vec<f64> {
            let logits = self.net.forward_pool(&self.features).unwrap();
            let sample = gumbel_softmax(&logits, &self.gumbel, self.noise_seed);
            let poses: Vec<&[Point3]> = self.poses.iter().map(Vec::as_slice).collect();
            let (_, est_grad) = weighted_pose_error_grad(&poses, &sample.probs, &self.truth).unwrap();
            let ent = entropy_grad(&sample.probs);
            let w = self.weights;
            let dprobs: Vec<f64> = (0..self.errors.len())
                .map(|i| w.alpha * self.errors[i] + w.beta * ent[i] + w.gamma * est_grad[i])
                .collect();
            let dlogits = sample.backward(&dprobs).unwrap();
            self.net.backward(&dlogits).unwrap().flatten()
        }

        /// Central differences with step `h` on every parameter.
        pub fn numeric_gradient(&mut self, h: f64) -> Vec<f64> {
            let theta = self.net.parameters();
            let mut out = Vec::with_capacity(theta.len());
            let mut probe = theta.clone();
            for i in 0..theta.len() {
                probe[i] = theta[i] + h;
                self.net.set_parameters(&probe).unwrap();
                let up = self.loss();
                probe[i] = theta[i] - h;
                self.net.set_parameters(&probe).unwrap();
                let down = self.loss();
                probe[i] = theta[i];
                out.push((up - down) / (2.0 * h));
            }
            self.net.set_parameters(&theta).unwrap();
            out
        }
    }

    /// Largest elementwise relative error between two gradients.
    pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
        analytic
            .iter()
            .zip(numeric)
            .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(FLOOR))
            .fold(0.0, f64::max)
    }

    /// Gradients below this are compared absolutely (tolerance 1e-9):
    /// central differences of a loss of order 100 at step 1e-5 carry
    /// roundoff near 1e-9.
    pub const FLOOR: f64 = 1e-5;
}
