use super::kinematics::Mover;
use super::planner::Planner;
use super::sensors::sees;
use super::{rng_stream, SimConfig, SimError};
use crate::geometry::{Pose, Position2D};
use crate::map::Cell;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

const MAX_ATTEMPTS: usize = 1000;
/// Candidate start cells tried for the detected robot per attempt.
const VIEW_TRIES: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotPlan {
    pub start: Pose,
    pub goal: Pose,
    pub path: Vec<Position2D>,
}

/// Start, goal and path of every robot. Robot 0 is the detecting robot and
/// starts localized; the others start delocalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub map: String,
    pub seed: u64,
    pub duration: f64,
    pub robots: Vec<RobotPlan>,
}

impl Scenario {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        toml::from_str(text).map_err(|e| SimError::Config(format!("scenario file: {e}")))
    }
}

fn random_cell<R: Rng + ?Sized>(cells: &[Cell], rng: &mut R) -> Cell {
    cells[rng.random_range(0..cells.len())]
}

/// Random two-robot scenario. The detecting robot gets a random start and a
/// reachable goal; the detected robot starts where the detecting robot sees it
/// within the first `cfg.first_view_window` seconds, both moving.
pub fn generate_scenario(planner: &Planner, map: &str, seed: u64, cfg: &SimConfig) -> Result<Scenario, SimError> {
    cfg.validate()?;
    let grid = planner.grid();
    let cells = planner.passable_cells();
    if cells.len() < 2 {
        return Err(SimError::GenerationFailed(0));
    }
    let mut rng = rng_stream(seed, 0);
    let window_ticks = (cfg.first_view_window / cfg.dt).round() as usize;
    for _ in 0..MAX_ATTEMPTS {
        let a_start = grid.cell_center(random_cell(&cells, &mut rng));
        let a_goal = grid.cell_center(random_cell(&cells, &mut rng));
        if a_start.distance(&a_goal) < cfg.min_travel {
            continue;
        }
        let Ok(a_path) = planner.plan(
            &Pose::new(a_start.x, a_start.y, 0.0),
            &Pose::new(a_goal.x, a_goal.y, 0.0),
        ) else {
            continue;
        };
        let heading = (a_path[1].y - a_start.y).atan2(a_path[1].x - a_start.x);
        let a_start = Pose::new(a_start.x, a_start.y, heading);
        let a_goal = Pose::new(a_goal.x, a_goal.y, 0.0);
        let a_plan = RobotPlan {
            start: a_start,
            goal: a_goal,
            path: a_path,
        };
        let a_poses = trajectory(&a_plan, cfg, window_ticks);

        for _ in 0..VIEW_TRIES {
            let view = a_poses[rng.random_range(0..a_poses.len())];
            let b = grid.cell_center(random_cell(&cells, &mut rng));
            let b_start = Pose::new(b.x, b.y, rng.random_range(0.0..TAU));
            if b.distance(&view.position()) < 4.0 * cfg.robot_radius
                || !sees(grid, &view, &b_start, &cfg.sensors.camera)
            {
                continue;
            }
            let b_goal = grid.cell_center(random_cell(&cells, &mut rng));
            if b.distance(&b_goal) < cfg.min_travel {
                continue;
            }
            let b_goal = Pose::new(b_goal.x, b_goal.y, 0.0);
            let Ok(b_path) = planner.plan(&b_start, &b_goal) else {
                continue;
            };
            let b_plan = RobotPlan {
                start: b_start,
                goal: b_goal,
                path: b_path,
            };
            // both robots move, so confirm an actual sighting on a camera tick
            let b_poses = trajectory(&b_plan, cfg, window_ticks);
            let seen = (0..=window_ticks)
                .filter(|&k| cfg.fires(k, cfg.sensors.camera.rate_hz))
                .any(|k| sees(grid, &a_poses[k], &b_poses[k], &cfg.sensors.camera));
            if seen {
                return Ok(Scenario {
                    map: map.to_string(),
                    seed,
                    duration: cfg.duration,
                    robots: vec![a_plan, b_plan],
                });
            }
        }
    }
    Err(SimError::GenerationFailed(MAX_ATTEMPTS))
}

/// Ground-truth poses for ticks `0..=ticks`.
pub(crate) fn trajectory(plan: &RobotPlan, cfg: &SimConfig, ticks: usize) -> Vec<Pose> {
    let mut m = Mover::new(plan.path.clone(), plan.start, cfg.speed, cfg.turn_rate);
    let mut out = Vec::with_capacity(ticks + 1);
    out.push(plan.start);
    for _ in 0..ticks {
        out.push(m.step(cfg.dt));
    }
    out
}
