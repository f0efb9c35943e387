//! Single-robot Monte Carlo localization.
//!
//! Uniform global initialization, odometry prediction, beam-end weighting against a
//! distance field, low-variance resampling gated by the effective sample size, and
//! a weighted-mean point estimate.

use crate::geometry::{wrap_two_pi, Pose};
use crate::map::{DistanceField, MapError, OccupancyGrid};
use crate::numeric::compensated_sum;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MclError {
    #[error("belief must contain at least one particle")]
    EmptyBelief,
    #[error("negative or non-finite particle weight {0}")]
    BadWeight(f64),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("invalid MCL configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub pose: Pose,
    pub weight: f64,
}

impl Particle {
    pub fn new(pose: Pose, weight: f64) -> Self {
        Self { pose, weight }
    }
}

/// Weighted particle set. Never empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    particles: Vec<Particle>,
}

impl Belief {
    pub fn new(particles: Vec<Particle>) -> Result<Self, MclError> {
        if particles.is_empty() {
            return Err(MclError::EmptyBelief);
        }
        if let Some(p) = particles.iter().find(|p| !(p.weight >= 0.0 && p.weight.is_finite())) {
            return Err(MclError::BadWeight(p.weight));
        }
        Ok(Self { particles })
    }

    /// Equal-weight belief over the given poses.
    pub fn from_poses(poses: impl IntoIterator<Item = Pose>) -> Result<Self, MclError> {
        let poses: Vec<Pose> = poses.into_iter().collect();
        let w = 1.0 / poses.len().max(1) as f64;
        Self::new(poses.into_iter().map(|p| Particle::new(p, w)).collect())
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn particles_mut(&mut self) -> &mut [Particle] {
        &mut self.particles
    }

    pub fn into_particles(self) -> Vec<Particle> {
        self.particles
    }

    pub fn weight_sum(&self) -> f64 {
        compensated_sum(self.particles.iter().map(|p| p.weight))
    }

    /// Rescales weights to sum to one. Returns `false` (and leaves weights uniform)
    /// when the total is zero or not finite.
    pub fn normalize(&mut self) -> bool {
        let total = self.weight_sum();
        if !(total > 0.0 && total.is_finite()) {
            self.set_uniform();
            return false;
        }
        for p in &mut self.particles {
            p.weight /= total;
        }
        true
    }

    pub fn set_uniform(&mut self) {
        let w = 1.0 / self.particles.len() as f64;
        for p in &mut self.particles {
            p.weight = w;
        }
    }

    pub fn has_uniform_weights(&self) -> bool {
        let w0 = self.particles[0].weight;
        self.particles.iter().all(|p| p.weight == w0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OdometryDelta {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

impl OdometryDelta {
    pub fn new(dx: f64, dy: f64, dtheta: f64) -> Self {
        debug_assert!(dx.is_finite() && dy.is_finite() && dtheta.is_finite());
        Self { dx, dy, dtheta }
    }

    pub fn translation(&self) -> f64 {
        self.dx.hypot(self.dy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scan {
    pub ranges: Vec<f64>,
    pub bearings: Vec<f64>,
    pub r_max: f64,
}

impl Scan {
    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MclConfig {
    pub n_particles: usize,
    /// Per-axis odometry noise coefficients `(x, y, theta)`.
    pub sigma_odom: [f64; 3],
    pub sigma_obs: f64,
    pub r_max: f64,
    pub trigger_xy: f64,
    pub trigger_theta: f64,
    pub beam_stride: usize,
    pub resample_threshold_fraction: f64,
}

impl Default for MclConfig {
    fn default() -> Self {
        Self {
            n_particles: 2000,
            sigma_odom: [0.05, 0.05, 0.05],
            sigma_obs: 0.5,
            r_max: 12.0,
            trigger_xy: 0.05,
            trigger_theta: 0.05,
            // ~37 of 667 beams
            beam_stride: 18,
            resample_threshold_fraction: 0.5,
        }
    }
}

impl MclConfig {
    pub fn validate(&self) -> Result<(), MclError> {
        let bad = |m: &str| Err(MclError::Config(m.to_string()));
        if self.n_particles == 0 {
            return bad("n_particles must be positive");
        }
        if self.sigma_odom.iter().any(|s| !(*s >= 0.0)) {
            return bad("sigma_odom must be nonnegative");
        }
        if !(self.sigma_obs > 0.0 && self.r_max > 0.0) {
            return bad("sigma_obs and r_max must be positive");
        }
        if !(self.trigger_xy >= 0.0 && self.trigger_theta >= 0.0) {
            return bad("triggers must be nonnegative");
        }
        if self.beam_stride == 0 {
            return bad("beam_stride must be at least 1");
        }
        if !(self.resample_threshold_fraction > 0.0 && self.resample_threshold_fraction <= 1.0) {
            return bad("resample_threshold_fraction must be in (0, 1]");
        }
        Ok(())
    }
}

/// `n` equal-weight particles uniform over the free cells of `grid`.
pub fn init_uniform<R: Rng + ?Sized>(grid: &OccupancyGrid, n: usize, rng: &mut R) -> Result<Belief, MclError> {
    let free = grid.free_cells();
    if free.is_empty() {
        return Err(MapError::NoFreeCells.into());
    }
    if n == 0 {
        return Err(MclError::EmptyBelief);
    }
    let h = grid.height();
    let poses = (0..n).map(|_| {
        let cell = free[rng.random_range(0..free.len())];
        let u = cell.col as f64 + rng.random::<f64>();
        let v = (h - 1 - cell.row) as f64 + rng.random::<f64>();
        let p = grid.grid_to_world(u, v);
        Pose::new(p.x, p.y, rng.random::<f64>() * TAU)
    });
    Belief::from_poses(poses.collect::<Vec<_>>())
}

/// `n` equal-weight particles drawn from a Gaussian around `center` with
/// per-axis standard deviations `(x, y, theta)`.
pub fn init_gaussian<R: Rng + ?Sized>(
    center: &Pose,
    sigma: [f64; 3],
    n: usize,
    rng: &mut R,
) -> Result<Belief, MclError> {
    if n == 0 {
        return Err(MclError::EmptyBelief);
    }
    let poses: Vec<Pose> = (0..n)
        .map(|_| {
            let z: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            Pose::new(
                center.x + sigma[0] * z[0],
                center.y + sigma[1] * z[1],
                center.theta + sigma[2] * z[2],
            )
        })
        .collect();
    Belief::from_poses(poses)
}

/// Standard deviations of the motion noise for a given odometry increment.
pub fn motion_noise_std(u: &OdometryDelta, sigma_odom: [f64; 3]) -> [f64; 3] {
    let t = u.translation();
    [
        sigma_odom[0] * t,
        sigma_odom[1] * t,
        sigma_odom[2] * (u.dtheta.abs() + 0.1 * t),
    ]
}

/// Samples the motion model for every particle. Weights are untouched.
pub fn predict<R: Rng + ?Sized>(b: &mut Belief, u: &OdometryDelta, cfg: &MclConfig, rng: &mut R) {
    let std = motion_noise_std(u, cfg.sigma_odom);
    let noisy = std.iter().any(|&s| s > 0.0);
    for p in b.particles_mut() {
        let (dx, dy, dt) = if noisy {
            let n: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            (u.dx + std[0] * n[0], u.dy + std[1] * n[1], u.dtheta + std[2] * n[2])
        } else {
            (u.dx, u.dy, u.dtheta)
        };
        p.pose = p.pose.compose(dx, dy, dt);
    }
}

/// Body-frame beam endpoints `(r cos b, r sin b)` for the beams the filter uses.
fn used_beams(z: &Scan, cfg: &MclConfig) -> Vec<(f64, f64)> {
    z.ranges
        .iter()
        .zip(&z.bearings)
        .step_by(cfg.beam_stride.max(1))
        .filter(|(r, _)| **r < z.r_max.min(cfg.r_max))
        .map(|(r, b)| {
            let (s, c) = b.sin_cos();
            (r * c, r * s)
        })
        .collect()
}

fn log_likelihood_with(pose: &Pose, beams: &[(f64, f64)], df: &DistanceField, inv_two_var: f64) -> f64 {
    let (s, c) = pose.theta.sin_cos();
    let mut acc = 0.0;
    for &(bx, by) in beams {
        let d = df.at(pose.x + c * bx - s * by, pose.y + s * bx + c * by);
        acc -= d * d * inv_two_var;
    }
    acc
}

/// Log of the beam-end likelihood `Π exp(-d²/2σ²)` of a scan taken from `pose`.
pub fn beam_end_log_likelihood(pose: &Pose, z: &Scan, df: &DistanceField, cfg: &MclConfig) -> f64 {
    let beams = used_beams(z, cfg);
    log_likelihood_with(pose, &beams, df, 1.0 / (2.0 * cfg.sigma_obs * cfg.sigma_obs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WeightOutcome {
    /// All weights vanished and the belief was reset to uniform.
    pub underflow_reset: bool,
}

/// Multiplies each weight by the beam-end likelihood of `z` and renormalizes.
///
/// Products are formed in log space and shifted by the maximum before
/// exponentiating, so the result equals the linear-space update whenever the
/// latter is representable.
pub fn weight_scan(b: &mut Belief, z: &Scan, df: &DistanceField, cfg: &MclConfig) -> WeightOutcome {
    let beams = used_beams(z, cfg);
    if beams.is_empty() {
        return WeightOutcome::default();
    }
    let inv_two_var = 1.0 / (2.0 * cfg.sigma_obs * cfg.sigma_obs);
    let logs: Vec<f64> = b
        .particles()
        .par_iter()
        .with_min_len(128)
        .map(|p| p.weight.ln() + log_likelihood_with(&p.pose, &beams, df, inv_two_var))
        .collect();
    apply_log_weights(b, &logs)
}

/// Replaces weights with `exp(log_w - max)` and renormalizes.
pub(crate) fn apply_log_weights(b: &mut Belief, logs: &[f64]) -> WeightOutcome {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        b.set_uniform();
        return WeightOutcome { underflow_reset: true };
    }
    for (p, l) in b.particles_mut().iter_mut().zip(logs) {
        p.weight = (l - max).exp();
    }
    let ok = b.normalize();
    WeightOutcome { underflow_reset: !ok }
}

/// `1 / Σ w²` over normalized weights.
pub fn effective_sample_size(b: &Belief) -> f64 {
    let total = b.weight_sum();
    let sq = compensated_sum(b.particles().iter().map(|p| {
        let w = p.weight / total;
        w * w
    }));
    1.0 / sq
}

/// Systematic resampling with one random offset; output weights are `1/N`.
pub fn resample_low_variance<R: Rng + ?Sized>(b: &Belief, rng: &mut R) -> Belief {
    let n = b.len();
    let picks = systematic_indices(b, n, rng.random::<f64>());
    let w = 1.0 / n as f64;
    Belief {
        particles: picks
            .into_iter()
            .map(|i| Particle::new(b.particles[i].pose, w))
            .collect(),
    }
}

/// Indices chosen by systematic resampling of `count` slots with offset `u0 ∈ [0, 1)`.
pub fn systematic_indices(b: &Belief, count: usize, u0: f64) -> Vec<usize> {
    let n = b.len();
    let total = b.weight_sum();
    let scale = count as f64 / total;
    let mut out = Vec::with_capacity(count);
    let mut i = 0usize;
    // running cumulative weight in units of slots, compensated
    let mut cum = b.particles[0].weight * scale;
    let mut comp = 0.0;
    for m in 0..count {
        let u = u0 + m as f64;
        while u >= cum + comp && i + 1 < n {
            i += 1;
            let v = b.particles[i].weight * scale;
            let t = cum + v;
            if cum.abs() >= v.abs() {
                comp += (cum - t) + v;
            } else {
                comp += (v - t) + cum;
            }
            cum = t;
        }
        out.push(i);
    }
    out
}

/// Weighted mean position with a circular mean heading.
pub fn estimate_pose(b: &Belief) -> Pose {
    let total = b.weight_sum();
    let ps = b.particles();
    let x = compensated_sum(ps.iter().map(|p| p.weight * p.pose.x)) / total;
    let y = compensated_sum(ps.iter().map(|p| p.weight * p.pose.y)) / total;
    let s = compensated_sum(ps.iter().map(|p| p.weight * p.pose.theta.sin()));
    let c = compensated_sum(ps.iter().map(|p| p.weight * p.pose.theta.cos()));
    let theta = if s.hypot(c) <= 1e-12 * total { 0.0 } else { s.atan2(c) };
    Pose::new(x, y, wrap_two_pi(theta))
}

/// One robot's filter: accumulates odometry and updates on scans once the
/// trigger distance has been travelled.
#[derive(Debug, Clone)]
pub struct RobotFilter {
    belief: Belief,
    cfg: MclConfig,
    /// Odometry composed since the last prediction, as a body-frame pose.
    pending: Pose,
    moved_xy: f64,
    moved_theta: f64,
    rng: ChaCha8Rng,
    pub stats: FilterStats,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub updates: usize,
    pub resamples: usize,
    pub underflow_resets: usize,
}

impl RobotFilter {
    pub fn new(belief: Belief, cfg: MclConfig, rng: ChaCha8Rng) -> Self {
        Self {
            belief,
            cfg,
            pending: Pose::default(),
            moved_xy: 0.0,
            moved_theta: 0.0,
            rng,
            stats: FilterStats::default(),
        }
    }

    pub fn belief(&self) -> &Belief {
        &self.belief
    }

    pub fn belief_mut(&mut self) -> &mut Belief {
        &mut self.belief
    }

    pub fn set_belief(&mut self, b: Belief) {
        self.belief = b;
    }

    pub fn config(&self) -> &MclConfig {
        &self.cfg
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn on_odometry(&mut self, u: &OdometryDelta) {
        self.pending = self.pending.compose(u.dx, u.dy, u.dtheta);
        self.moved_xy += u.translation();
        self.moved_theta += u.dtheta.abs();
    }

    pub fn motion_triggered(&self) -> bool {
        self.moved_xy >= self.cfg.trigger_xy || self.moved_theta >= self.cfg.trigger_theta
    }

    /// Applies any accumulated odometry through the motion model without weighting.
    pub fn flush_motion(&mut self) {
        if self.pending == Pose::default() {
            return;
        }
        let (dx, dy, dt) = Pose::default().between(&self.pending);
        let u = OdometryDelta::new(dx, dy, dt);
        predict(&mut self.belief, &u, &self.cfg, &mut self.rng);
        self.pending = Pose::default();
    }

    /// Filter update for a scan. Returns `false` when the trigger has not been reached.
    pub fn on_scan(&mut self, z: &Scan, df: &DistanceField) -> bool {
        if !self.motion_triggered() {
            return false;
        }
        self.flush_motion();
        self.moved_xy = 0.0;
        self.moved_theta = 0.0;
        let out = weight_scan(&mut self.belief, z, df, &self.cfg);
        if out.underflow_reset {
            self.stats.underflow_resets += 1;
        }
        self.stats.updates += 1;
        self.resample_if_needed();
        true
    }

    pub fn needs_resample(&self) -> bool {
        effective_sample_size(&self.belief) < self.belief.len() as f64 * self.cfg.resample_threshold_fraction
    }

    pub fn resample_if_needed(&mut self) -> bool {
        if self.needs_resample() {
            self.belief = resample_low_variance(&self.belief, &mut self.rng);
            self.stats.resamples += 1;
            true
        } else {
            false
        }
    }

    pub fn estimate(&self) -> Pose {
        estimate_pose(&self.belief)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{Cell, CellState};
    use rand::SeedableRng;
    use std::f64::consts::PI;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn weighted(ws: &[f64]) -> Belief {
        Belief::new(
            ws.iter()
                .enumerate()
                .map(|(i, &w)| Particle::new(Pose::new(i as f64, 0.0, 0.0), w))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn empty_belief_rejected() {
        assert_eq!(Belief::new(vec![]).unwrap_err(), MclError::EmptyBelief);
    }

    #[test]
    fn init_on_single_free_cell() {
        let mut g = OccupancyGrid::new(2, 2, 1.0, Pose::default(), vec![CellState::Occupied; 4]);
        g.set(Cell::new(1, 0), CellState::Free);
        let b = init_uniform(&g, 1, &mut rng(1)).unwrap();
        assert_eq!(b.particles()[0].weight, 1.0);
        assert_eq!(
            g.world_to_cell(&b.particles()[0].pose.position()),
            Some(Cell::new(1, 0))
        );
    }

    #[test]
    fn init_fails_without_free_cells() {
        let g = OccupancyGrid::new(2, 2, 1.0, Pose::default(), vec![CellState::Occupied; 4]);
        assert!(matches!(
            init_uniform(&g, 10, &mut rng(1)),
            Err(MclError::Map(MapError::NoFreeCells))
        ));
    }

    #[test]
    fn zero_motion_zero_noise_is_identity() {
        let mut b = init_uniform(&OccupancyGrid::empty(5, 5, 1.0, Pose::default()), 50, &mut rng(3)).unwrap();
        let before = b.clone();
        let cfg = MclConfig {
            sigma_odom: [0.0; 3],
            ..MclConfig::default()
        };
        predict(&mut b, &OdometryDelta::default(), &cfg, &mut rng(4));
        assert_eq!(b, before);
    }

    #[test]
    fn body_frame_composition() {
        let mut b = Belief::from_poses([Pose::new(0.0, 0.0, PI / 2.0)]).unwrap();
        let cfg = MclConfig {
            sigma_odom: [0.0; 3],
            ..MclConfig::default()
        };
        predict(&mut b, &OdometryDelta::new(1.0, 0.0, 0.0), &cfg, &mut rng(0));
        let p = b.particles()[0].pose;
        assert!(p.x.abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12 && (p.theta - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn ess_cases() {
        assert!((effective_sample_size(&weighted(&[0.01; 100])) - 100.0).abs() < 1e-9);
        assert!((effective_sample_size(&weighted(&[1.0, 0.0, 0.0])) - 1.0).abs() < 1e-12);
        assert!((effective_sample_size(&weighted(&[0.5, 0.5, 0.0, 0.0])) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn systematic_resampling_counts() {
        let b = weighted(&[0.75, 0.25]);
        // 4 slots over weights (0.75, 0.25)
        for u0 in [0.0, 0.3, 0.999_999] {
            let idx = systematic_indices(&b, 4, u0);
            assert_eq!(idx.iter().filter(|&&i| i == 0).count(), 3, "u0={u0}");
            assert_eq!(idx.iter().filter(|&&i| i == 1).count(), 1);
        }
    }

    #[test]
    fn uniform_resampling_reproduces_input() {
        let b = weighted(&[0.2; 5]);
        for seed in 0..20 {
            let r = resample_low_variance(&b, &mut rng(seed));
            let xs: Vec<f64> = r.particles().iter().map(|p| p.pose.x).collect();
            assert_eq!(xs, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        }
    }

    #[test]
    fn degenerate_weights_resample_to_one_particle() {
        let b = weighted(&[1.0, 0.0, 0.0, 0.0]);
        let r = resample_low_variance(&b, &mut rng(9));
        assert!(r.particles().iter().all(|p| p.pose.x == 0.0 && p.weight == 0.25));
    }

    #[test]
    fn circular_mean_heading() {
        let b = Belief::from_poses([Pose::new(0.0, 0.0, 0.1), Pose::new(2.0, 2.0, TAU - 0.1)]).unwrap();
        let e = estimate_pose(&b);
        assert!((e.x - 1.0).abs() < 1e-12 && (e.y - 1.0).abs() < 1e-12);
        assert!(e.theta.abs() < 1e-9 || (e.theta - TAU).abs() < 1e-9);
    }

    #[test]
    fn opposing_headings_default_to_zero() {
        let b = Belief::from_poses([Pose::new(0.0, 0.0, 0.0), Pose::new(0.0, 0.0, PI)]).unwrap();
        assert_eq!(estimate_pose(&b).theta, 0.0);
    }

    #[test]
    fn beam_factor_at_obstacle_and_one_sigma() {
        // obstacle column at x in [3, 4); resolution 1
        let text = "resolution: 1\norigin: 0 0 0\n\n...#.\n...#.\n...#.\n";
        let g = OccupancyGrid::parse(text).unwrap();
        let df = DistanceField::new(&g);
        let cfg = MclConfig {
            beam_stride: 1,
            sigma_obs: 1.0,
            ..MclConfig::default()
        };
        let pose = Pose::new(0.5, 1.5, 0.0);
        // endpoint at cell center (3.5, 1.5): occupied -> d = 0
        let z = Scan {
            ranges: vec![3.0],
            bearings: vec![0.0],
            r_max: 12.0,
        };
        assert_eq!(beam_end_log_likelihood(&pose, &z, &df, &cfg).exp(), 1.0);
        // endpoint at (2.5, 1.5): one cell (= sigma) from the obstacle
        let z = Scan {
            ranges: vec![2.0],
            bearings: vec![0.0],
            r_max: 12.0,
        };
        let f = beam_end_log_likelihood(&pose, &z, &df, &cfg).exp();
        assert!((f - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn max_range_beams_are_skipped() {
        let g = OccupancyGrid::empty(5, 5, 1.0, Pose::default());
        let df = DistanceField::new(&g);
        let z = Scan {
            ranges: vec![12.0],
            bearings: vec![0.0],
            r_max: 12.0,
        };
        let mut b = weighted(&[0.3, 0.7]);
        let before = b.clone();
        weight_scan(&mut b, &z, &df, &MclConfig::default());
        assert_eq!(b, before);
    }

    #[test]
    fn filter_ignores_sub_threshold_motion() {
        let g = OccupancyGrid::empty(20, 20, 0.5, Pose::default());
        let df = DistanceField::new(&g);
        let b = init_uniform(&g, 30, &mut rng(2)).unwrap();
        let mut f = RobotFilter::new(b.clone(), MclConfig::default(), rng(5));
        let z = Scan {
            ranges: vec![1.0; 40],
            bearings: (0..40).map(|i| i as f64 * 0.15).collect(),
            r_max: 12.0,
        };
        f.on_odometry(&OdometryDelta::new(0.01, 0.0, 0.01));
        assert!(!f.on_scan(&z, &df));
        assert_eq!(f.belief(), &b);
        f.on_odometry(&OdometryDelta::new(0.05, 0.0, 0.0));
        assert!(f.on_scan(&z, &df));
        assert_eq!(f.stats.updates, 1);
    }
}
