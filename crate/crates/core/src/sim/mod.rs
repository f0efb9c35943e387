//! Deterministic multi-robot simulator.
//!
//! A run is split in two stages. Recording moves the robots along their planned
//! paths and samples every sensor, producing a [`SensorLog`] that does not depend
//! on the exchange strategy. Replaying runs the filters and the belief exchange
//! over a recorded log, so strategies can be compared on identical sensor noise.

mod kinematics;
pub mod logio;
pub mod maps;
mod planner;
mod record;
mod replay;
mod scenario;
mod sensors;

pub use kinematics::Mover;
pub use planner::{path_length, plan_path, Planner};
pub use record::{record, DetectionEvent, SensorLog, SensorTick};
pub use replay::{
    replay, run, BeliefSnapshot, MessageEvent, ReplayConfig, ReplayOutput, RunLog, RunTick, RunTimings, SnapshotKind,
    StrategyLabel,
};
pub use scenario::{generate_scenario, RobotPlan, Scenario};
pub use sensors::{
    noisy_odometry, sees, simulate_detection, simulate_scan, CameraSpec, DetectionNoise, LidarSpec, SensorSpec,
};

use crate::fusion::FusionError;
use crate::geometry::Position2D;
use crate::map::MapError;
use crate::mcl::MclError;
use crate::wire::WireError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version tag written into every log and CSV produced from simulation output.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("no path from ({:.2}, {:.2}) to ({:.2}, {:.2}): {reason}", from.x, from.y, to.x, to.y)]
    Unreachable {
        from: Position2D,
        to: Position2D,
        reason: &'static str,
    },
    #[error("scenario generation failed after {0} attempts")]
    GenerationFailed(usize),
    #[error("invalid simulation setting: {0}")]
    Config(String),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed log: {0}")]
    Format(String),
    #[error("schema version {found} is not supported (expected {expected})")]
    Schema { found: u32, expected: u32 },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Mcl(#[from] MclError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Wire(#[from] WireError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Fixed step (s).
    pub dt: f64,
    /// Run length (s).
    pub duration: f64,
    /// Translational speed (m/s).
    pub speed: f64,
    /// Heading slew limit (rad/s).
    pub turn_rate: f64,
    pub robot_radius: f64,
    pub sensors: SensorSpec,
    /// The detected robot must be seen within this many seconds of the start.
    pub first_view_window: f64,
    /// Minimum start-to-goal distance (m).
    pub min_travel: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            duration: 60.0,
            speed: 0.4,
            turn_rate: 2.0,
            robot_radius: 0.16,
            sensors: SensorSpec::default(),
            first_view_window: 2.0,
            min_travel: 3.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("dt", self.dt),
            ("duration", self.duration),
            ("speed", self.speed),
            ("turn_rate", self.turn_rate),
            ("robot_radius", self.robot_radius),
            ("lidar rate", self.sensors.lidar.rate_hz),
            ("camera rate", self.sensors.camera.rate_hz),
            ("lidar range", self.sensors.lidar.r_max),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(SimError::Config(format!("{name} must be positive, got {v}")));
        }
        if self.sensors.lidar.n_beams == 0 {
            return Err(SimError::Config("lidar needs at least one beam".into()));
        }
        Ok(())
    }

    /// Number of ticks including the one at t = 0.
    pub fn n_ticks(&self) -> usize {
        (self.duration / self.dt).round() as usize + 1
    }

    /// Whether a sensor running at `rate_hz` fires on tick `k` (nearest-tick
    /// subsampling of the fixed step).
    pub fn fires(&self, k: usize, rate_hz: f64) -> bool {
        let period = 1.0 / (rate_hz * self.dt);
        let j = (k as f64 / period).round();
        (j * period).round() as usize == k
    }
}

/// Independent random stream `stream` derived from `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
