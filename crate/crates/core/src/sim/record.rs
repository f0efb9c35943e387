use super::kinematics::Mover;
use super::sensors::{noisy_odometry, simulate_detection, simulate_scan};
use super::{rng_stream, Scenario, SimConfig, SimError, SCHEMA_VERSION};
use crate::geometry::{to_relative, Detection, Pose};
use crate::map::OccupancyGrid;
use crate::mcl::OdometryDelta;
use serde::{Deserialize, Serialize};

/// One camera sighting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub observer: usize,
    pub target: usize,
    /// Exact relative position of the target.
    pub truth: Detection,
    pub measured: Detection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorTick {
    pub t: f64,
    pub truth: Vec<Pose>,
    /// Noisy body-frame motion since the previous tick, per robot.
    pub odometry: Vec<OdometryDelta>,
    /// Scan ranges per robot on lidar ticks (bearings follow the lidar spec).
    pub scans: Vec<Option<Vec<f32>>>,
    pub detections: Vec<DetectionEvent>,
}

/// Everything the robots sensed during a run, independent of any exchange strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorLog {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub seed: u64,
    pub config: SimConfig,
    pub ticks: Vec<SensorTick>,
}

impl SensorLog {
    pub fn n_robots(&self) -> usize {
        self.scenario.robots.len()
    }

    /// Time of the first sighting, if any.
    pub fn first_detection(&self) -> Option<f64> {
        self.ticks.iter().find(|t| !t.detections.is_empty()).map(|t| t.t)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("sensor log serializes")))
    }

    pub fn detection_count(&self) -> usize {
        self.ticks.iter().map(|t| t.detections.len()).sum()
    }
}

/// Moves the robots along their plans and samples all sensors. Robot 0 is the
/// only one with a camera. Per-robot noise streams are derived from `seed`, so
/// adding robots does not perturb the others.
pub fn record(scenario: &Scenario, grid: &OccupancyGrid, cfg: &SimConfig, seed: u64) -> Result<SensorLog, SimError> {
    cfg.validate()?;
    if scenario.robots.is_empty() {
        return Err(SimError::Config("scenario has no robots".into()));
    }
    let mut cfg = cfg.clone();
    cfg.duration = scenario.duration;
    let n = scenario.robots.len();
    let mut movers: Vec<Mover> = scenario
        .robots
        .iter()
        .map(|r| Mover::new(r.path.clone(), r.start, cfg.speed, cfg.turn_rate))
        .collect();
    let mut robot_rngs: Vec<_> = (0..n).map(|i| rng_stream(seed, 100 + i as u64)).collect();
    let mut camera_rng = rng_stream(seed, 99);
    let mut truth: Vec<Pose> = scenario.robots.iter().map(|r| r.start).collect();
    let lidar = &cfg.sensors.lidar;
    let mut ticks = Vec::with_capacity(cfg.n_ticks());

    for k in 0..cfg.n_ticks() {
        let mut odometry = vec![OdometryDelta::new(0.0, 0.0, 0.0); n];
        if k > 0 {
            for i in 0..n {
                let next = movers[i].step(cfg.dt);
                if !grid.is_free(&next.position()) {
                    return Err(SimError::Config(format!("robot {i} left free space at tick {k}")));
                }
                let (dx, dy, dth) = truth[i].between(&next);
                odometry[i] = noisy_odometry(dx, dy, dth, cfg.sensors.odometry_sigma, &mut robot_rngs[i]);
                truth[i] = next;
            }
        }
        let scans = if cfg.fires(k, lidar.rate_hz) {
            (0..n)
                .map(|i| {
                    let s = simulate_scan(grid, &truth[i], lidar, &mut robot_rngs[i]);
                    Some(s.ranges.iter().map(|&r| r as f32).collect())
                })
                .collect()
        } else {
            vec![None; n]
        };
        let mut detections = Vec::new();
        if cfg.fires(k, cfg.sensors.camera.rate_hz) {
            for target in 1..n {
                if let Some(measured) =
                    simulate_detection(&truth[0], &truth[target], grid, &cfg.sensors, &mut camera_rng)
                {
                    detections.push(DetectionEvent {
                        observer: 0,
                        target,
                        truth: to_relative(&truth[target].position(), &truth[0]),
                        measured,
                    });
                }
            }
        }
        ticks.push(SensorTick {
            t: k as f64 * cfg.dt,
            truth: truth.clone(),
            odometry,
            scans,
            detections,
        });
    }
    Ok(SensorLog {
        schema_version: SCHEMA_VERSION,
        scenario: scenario.clone(),
        seed,
        config: cfg,
        ticks,
    })
}
