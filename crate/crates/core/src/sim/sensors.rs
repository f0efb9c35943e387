use crate::geometry::{to_relative, Detection, Pose};
use crate::map::OccupancyGrid;
use crate::mcl::{motion_noise_std, OdometryDelta, Scan};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LidarSpec {
    pub n_beams: usize,
    /// Angular coverage (rad), centered on the heading.
    pub fov: f64,
    pub r_max: f64,
    pub rate_hz: f64,
    pub range_noise_sigma: f64,
}

impl Default for LidarSpec {
    fn default() -> Self {
        Self {
            n_beams: 667,
            fov: TAU,
            r_max: 12.0,
            rate_hz: 6.0,
            range_noise_sigma: 0.02,
        }
    }
}

impl LidarSpec {
    /// Beam bearings relative to the heading.
    pub fn bearings(&self) -> Vec<f64> {
        let step = self.fov / self.n_beams as f64;
        (0..self.n_beams).map(|i| -0.5 * self.fov + i as f64 * step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraSpec {
    /// Horizontal field of view (rad).
    pub fov: f64,
    pub rate_hz: f64,
    /// Detections beyond this range are dropped (m).
    pub max_range: f64,
}

impl Default for CameraSpec {
    fn default() -> Self {
        Self {
            fov: 102f64.to_radians(),
            rate_hz: 5.0,
            max_range: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionNoise {
    pub range_scale: f64,
    pub bearing_sigma: f64,
}

impl Default for DetectionNoise {
    fn default() -> Self {
        Self {
            range_scale: 0.05,
            bearing_sigma: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorSpec {
    pub lidar: LidarSpec,
    pub camera: CameraSpec,
    pub detection_noise: DetectionNoise,
    /// Odometry noise factors, same form as the filter's motion model.
    pub odometry_sigma: [f64; 3],
}

impl Default for SensorSpec {
    fn default() -> Self {
        Self {
            lidar: LidarSpec::default(),
            camera: CameraSpec::default(),
            detection_noise: DetectionNoise::default(),
            odometry_sigma: [0.02; 3],
        }
    }
}

impl SensorSpec {
    /// All sensors exact.
    pub fn noise_free() -> Self {
        let mut s = Self::default();
        s.lidar.range_noise_sigma = 0.0;
        s.detection_noise = DetectionNoise {
            range_scale: 0.0,
            bearing_sigma: 0.0,
        };
        s.odometry_sigma = [0.0; 3];
        s
    }
}

/// Full scan from `pose` with Gaussian range noise; readings stay in `[0, r_max]`
/// and beams that hit nothing report exactly `r_max`.
pub fn simulate_scan<R: Rng + ?Sized>(grid: &OccupancyGrid, pose: &Pose, spec: &LidarSpec, rng: &mut R) -> Scan {
    let bearings = spec.bearings();
    let ranges = bearings
        .iter()
        .map(|b| {
            let r = grid
                .raycast(pose, *b, spec.r_max)
                .expect("robot pose is on a free cell");
            if r >= spec.r_max {
                return spec.r_max;
            }
            let noise: f64 = rng.sample(StandardNormal);
            (r + spec.range_noise_sigma * noise).clamp(0.0, spec.r_max)
        })
        .collect();
    Scan {
        ranges,
        bearings,
        r_max: spec.r_max,
    }
}

/// Whether `target` is inside the camera cone of `observer` and not occluded.
pub fn sees(grid: &OccupancyGrid, observer: &Pose, target: &Pose, camera: &CameraSpec) -> bool {
    let rel = to_relative(&target.position(), observer);
    if rel.range == 0.0 || rel.range > camera.max_range || rel.bearing.abs() > 0.5 * camera.fov {
        return false;
    }
    let hit = grid
        .raycast(observer, rel.bearing, rel.range)
        .expect("observer pose is on a free cell");
    hit >= rel.range
}

/// Noisy relative detection of `b` from `a`, or `None` when `b` is out of view.
pub fn simulate_detection<R: Rng + ?Sized>(
    a: &Pose,
    b: &Pose,
    grid: &OccupancyGrid,
    spec: &SensorSpec,
    rng: &mut R,
) -> Option<Detection> {
    if !sees(grid, a, b, &spec.camera) {
        return None;
    }
    let rel = to_relative(&b.position(), a);
    let n = &spec.detection_noise;
    let zr: f64 = rng.sample(StandardNormal);
    let zb: f64 = rng.sample(StandardNormal);
    let range = (rel.range * (1.0 + n.range_scale * zr)).max(0.0);
    Some(Detection::new(range, rel.bearing + n.bearing_sigma * zb))
}

/// Odometry reading for the true body-frame motion `(dx, dy, dθ)`.
pub fn noisy_odometry<R: Rng + ?Sized>(dx: f64, dy: f64, dtheta: f64, sigma: [f64; 3], rng: &mut R) -> OdometryDelta {
    let truth = OdometryDelta::new(dx, dy, dtheta);
    let std = motion_noise_std(&truth, sigma);
    let mut z = [0.0f64; 3];
    for v in &mut z {
        *v = rng.sample(StandardNormal);
    }
    let dtheta = (dtheta + std[2] * z[2]).clamp(-PI, PI);
    OdometryDelta::new(dx + std[0] * z[0], dy + std[1] * z[1], dtheta)
}
