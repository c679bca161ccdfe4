use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{intrinsics, Camera, Point3};

/// Camera arrangement around the capture volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arrangement {
    /// Evenly spaced around the full circle.
    Ring,
    /// Evenly spaced over an arc of `span_deg` degrees.
    Arc { span_deg: f64 },
    /// Alternating low and high elevation rings on a hemisphere.
    Dome,
    /// Cameras given verbatim.
    Explicit { cameras: Vec<Camera> },
}

/// Recipe for a synthetic camera rig.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigSpec {
    pub arrangement: Arrangement,
    pub camera_count: usize,
    /// Horizontal distance of the cameras from the capture center (mm).
    pub radius: f64,
    /// Camera heights are drawn uniformly from this range (mm).
    pub height_range: (f64, f64),
    pub focal_px: f64,
    pub image_size: (f64, f64),
    /// Point every camera looks at (mm).
    pub target: [f64; 3],
    /// Angular jitter of camera placement (degrees).
    pub azimuth_jitter_deg: f64,
    pub seed: u64,
}

impl RigSpec {
    fn base(arrangement: Arrangement, camera_count: usize) -> Self {
        Self {
            arrangement,
            camera_count,
            radius: 4000.0,
            height_range: (1000.0, 2000.0),
            focal_px: 1000.0,
            image_size: (1000.0, 1000.0),
            target: [0.0, 0.0, 900.0],
            azimuth_jitter_deg: 5.0,
            seed: 0,
        }
    }

    pub fn ring(camera_count: usize) -> Self {
        Self::base(Arrangement::Ring, camera_count)
    }

    pub fn arc(camera_count: usize) -> Self {
        Self::base(Arrangement::Arc { span_deg: 150.0 }, camera_count)
    }

    pub fn dome(camera_count: usize) -> Self {
        Self::base(Arrangement::Dome, camera_count)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn target(&self) -> Point3 {
        Point3::from(self.target)
    }

    /// Instantiates the cameras, every one looking at the target.
    pub fn build(&self) -> Result<Vec<Camera>> {
        if let Arrangement::Explicit { cameras } = &self.arrangement {
            if cameras.len() < 2 {
                return Err(Error::Config("rig needs at least 2 cameras".into()));
            }
            for c in cameras {
                c.validate()?;
            }
            return Ok(cameras.clone());
        }
        if self.camera_count < 2 {
            return Err(Error::Config("rig needs at least 2 cameras".into()));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Config("rig radius must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let k = intrinsics(self.focal_px, 0.5 * self.image_size.0, 0.5 * self.image_size.1);
        let target = self.target();
        let n = self.camera_count;
        let jitter = self.azimuth_jitter_deg.to_radians();
        let mut cams = Vec::with_capacity(n);
        for i in 0..n {
            let (azimuth, height, dist) = match &self.arrangement {
                Arrangement::Ring => {
                    let a = std::f64::consts::TAU * i as f64 / n as f64;
                    (a, rng.random_range(self.height_range.0..=self.height_range.1), self.radius)
                }
                Arrangement::Arc { span_deg } => {
                    let span = span_deg.to_radians();
                    let a = -0.5 * span + span * i as f64 / (n - 1) as f64;
                    (a, rng.random_range(self.height_range.0..=self.height_range.1), self.radius)
                }
                Arrangement::Dome => {
                    // lower ring at 10°, upper ring at 40° elevation
                    let upper = i % 2 == 1;
                    let elev: f64 = if upper { 40f64.to_radians() } else { 10f64.to_radians() };
                    let a = std::f64::consts::TAU * i as f64 / n as f64;
                    (a, target.z + self.radius * elev.tan(), self.radius)
                }
                Arrangement::Explicit { .. } => unreachable!(),
            };
            let azimuth = azimuth + rng.random_range(-jitter..=jitter);
            let center = Point3::new(target.x + dist * azimuth.cos(), target.y + dist * azimuth.sin(), height);
            cams.push(Camera::look_at(i, k, center, target));
        }
        Ok(cams)
    }
}
