use super::record::{record, SensorLog};
use super::{rng_stream, Scenario, SimConfig, SimError, SCHEMA_VERSION};
use crate::fusion::{
    fuse_received, reciprocal_sample, summarize, DetectionModel, FusionStrategy, ReceivedBelief, SummaryConfig,
    DEFAULT_ALPHA,
};
use crate::geometry::{Detection, Pose};
use crate::map::{DistanceField, OccupancyGrid};
use crate::mcl::{
    effective_sample_size, init_gaussian, init_uniform, resample_low_variance, Belief, MclConfig, Particle,
    RobotFilter, Scan,
};
use crate::wire::{decode, encode, Method};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::time::Instant;

/// What the detected robot does with detection messages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyLabel {
    /// Plain localization; messages are ignored.
    Mcl,
    Exchange(FusionStrategy),
}

impl StrategyLabel {
    /// Method name, with `:alpha` appended when alpha is not the default.
    pub fn name(&self) -> String {
        match self {
            StrategyLabel::Mcl => "mcl".to_string(),
            StrategyLabel::Exchange(s) if s.alpha == DEFAULT_ALPHA || s.method == Method::Det => {
                s.method.name().to_string()
            }
            StrategyLabel::Exchange(s) => format!("{}:{}", s.method.name(), s.alpha),
        }
    }

    /// Inverse of [`StrategyLabel::name`]: `mcl`, a method name, or
    /// `method:alpha`. A bare method name gets `alpha`.
    pub fn parse(text: &str, alpha: f64) -> Result<Self, SimError> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("mcl") {
            return Ok(StrategyLabel::Mcl);
        }
        let (name, alpha) = match text.split_once(':') {
            Some((name, a)) => (
                name,
                a.parse::<f64>()
                    .map_err(|_| SimError::UnknownStrategy(text.to_string()))?,
            ),
            None => (text, alpha),
        };
        let method = Method::from_name(name).ok_or_else(|| SimError::UnknownStrategy(text.to_string()))?;
        Ok(StrategyLabel::Exchange(FusionStrategy::new(method, alpha)?))
    }

    pub fn method(&self) -> Option<Method> {
        match self {
            StrategyLabel::Mcl => None,
            StrategyLabel::Exchange(s) => Some(s.method),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReplayConfig {
    pub mcl: MclConfig,
    pub summary: SummaryConfig,
    pub detection_model: DetectionModel,
    /// Initial spread `(x, y, theta)` of the localized robot's particles.
    pub init_sigma: [f64; 3],
    /// Keep a belief copy of every robot every this many ticks (0 = never).
    pub snapshot_every: usize,
    /// Keep the receiver's belief right before and after every fusion.
    pub snapshot_fusions: bool,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self {
            mcl: MclConfig::default(),
            summary: SummaryConfig::default(),
            detection_model: DetectionModel::default(),
            init_sigma: [0.1, 0.1, 0.05],
            snapshot_every: 0,
            snapshot_fusions: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTick {
    pub t: f64,
    pub truth: Vec<Pose>,
    pub estimate: Vec<Pose>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageEvent {
    pub tick: usize,
    pub sender: usize,
    pub receiver: usize,
    pub truth: Detection,
    pub detection: Detection,
    #[serde(with = "hex_bytes")]
    pub bytes: Vec<u8>,
    /// Whether the receiver resampled after fusing.
    pub resampled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotKind {
    Periodic,
    BeforeFusion,
    AfterFusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSnapshot {
    pub tick: usize,
    pub robot: usize,
    pub kind: SnapshotKind,
    pub particles: Vec<Particle>,
}

/// Deterministic outcome of one replay: a pure function of the sensor log,
/// strategy, configuration and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub schema_version: u32,
    pub strategy: StrategyLabel,
    pub scenario_seed: u64,
    pub sensor_seed: u64,
    pub filter_seed: u64,
    pub dt: f64,
    pub duration: f64,
    /// Robot whose localization is evaluated.
    pub tracked: usize,
    pub first_detection: Option<f64>,
    pub ticks: Vec<RunTick>,
    pub messages: Vec<MessageEvent>,
    #[serde(skip)]
    pub snapshots: Vec<BeliefSnapshot>,
}

impl RunLog {
    pub fn bytes_sent(&self) -> usize {
        self.messages.iter().map(|m| m.bytes.len()).sum()
    }

    /// SHA-256 over the canonical JSON form plus the snapshot particles.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("run log serializes"));
        for s in &self.snapshots {
            h.update((s.tick as u64).to_le_bytes());
            h.update((s.robot as u64).to_le_bytes());
            h.update([s.kind as u8]);
            for p in &s.particles {
                for v in [p.pose.x, p.pose.y, p.pose.theta, p.weight] {
                    h.update(v.to_le_bytes());
                }
            }
        }
        hex::encode(h.finalize())
    }
}

/// Wall-clock costs of the exchange; kept apart from [`RunLog`] so the log stays
/// deterministic.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTimings {
    pub compression_ms: Vec<f64>,
    pub fusion_ms: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ReplayOutput {
    pub log: RunLog,
    pub timings: RunTimings,
}

fn snapshot(tick: usize, robot: usize, kind: SnapshotKind, b: &Belief) -> BeliefSnapshot {
    BeliefSnapshot {
        tick,
        robot,
        kind,
        particles: b.particles().to_vec(),
    }
}

/// Runs every robot's filter over a recorded log. Robot 0 starts near its true
/// pose; the others start uniform over the free space. With an exchange
/// strategy, every sighting makes robot 0 summarize its belief, encode it, and
/// the sighted robot decode and fuse it.
pub fn replay(
    log: &SensorLog,
    grid: &OccupancyGrid,
    df: &DistanceField,
    strategy: StrategyLabel,
    cfg: &ReplayConfig,
    seed: u64,
) -> Result<ReplayOutput, SimError> {
    if log.schema_version != SCHEMA_VERSION {
        return Err(SimError::Schema {
            found: log.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    cfg.mcl.validate()?;
    let n = log.n_robots();
    let mut filters = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = rng_stream(seed, 200 + i as u64);
        let belief = if i == 0 {
            init_gaussian(
                &log.scenario.robots[0].start,
                cfg.init_sigma,
                cfg.mcl.n_particles,
                &mut rng,
            )?
        } else {
            init_uniform(grid, cfg.mcl.n_particles, &mut rng)?
        };
        filters.push(RobotFilter::new(belief, cfg.mcl.clone(), rng));
    }
    let mut compress_rng = rng_stream(seed, 300);
    let bearings = log.config.sensors.lidar.bearings();
    let r_max = log.config.sensors.lidar.r_max;

    let mut ticks = Vec::with_capacity(log.ticks.len());
    let mut messages = Vec::new();
    let mut snapshots = Vec::new();
    let mut timings = RunTimings::default();
    let mut seq = 0u32;

    for (k, st) in log.ticks.iter().enumerate() {
        for (i, f) in filters.iter_mut().enumerate() {
            if k > 0 {
                f.on_odometry(&st.odometry[i]);
            }
            if let Some(ranges) = &st.scans[i] {
                let scan = Scan {
                    ranges: ranges.iter().map(|&r| r as f64).collect(),
                    bearings: bearings.clone(),
                    r_max,
                };
                f.on_scan(&scan, df);
            }
        }
        if let StrategyLabel::Exchange(strategy) = strategy {
            for ev in &st.detections {
                let started = Instant::now();
                let msg = summarize(
                    filters[ev.observer].belief(),
                    &ev.measured,
                    strategy.method,
                    &cfg.summary,
                    ev.observer as u8,
                    seq,
                    &mut compress_rng,
                )?;
                let bytes = encode(&msg)?;
                timings.compression_ms.push(started.elapsed().as_secs_f64() * 1e3);
                seq = seq.wrapping_add(1);

                let started = Instant::now();
                let received = decode(&bytes)?;
                let rb = ReceivedBelief::from_summary(&received, &cfg.detection_model)?;
                let receiver = &mut filters[ev.target];
                receiver.flush_motion();
                if cfg.snapshot_fusions {
                    snapshots.push(snapshot(k, ev.target, SnapshotKind::BeforeFusion, receiver.belief()));
                }
                fuse_received(receiver.belief_mut(), &rb);
                if cfg.snapshot_fusions {
                    snapshots.push(snapshot(k, ev.target, SnapshotKind::AfterFusion, receiver.belief()));
                }
                let b = receiver.belief();
                let resampled = effective_sample_size(b) < cfg.mcl.resample_threshold_fraction * b.len() as f64;
                if resampled {
                    let current = receiver.belief().clone();
                    let next = if strategy.alpha > 0.0 && strategy.method != Method::Det {
                        reciprocal_sample(&current, &rb, strategy.alpha, receiver.rng_mut())?
                    } else {
                        resample_low_variance(&current, receiver.rng_mut())
                    };
                    receiver.set_belief(next);
                }
                timings.fusion_ms.push(started.elapsed().as_secs_f64() * 1e3);
                messages.push(MessageEvent {
                    tick: k,
                    sender: ev.observer,
                    receiver: ev.target,
                    truth: ev.truth,
                    detection: ev.measured,
                    bytes,
                    resampled,
                });
            }
        }
        if cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0 {
            for (i, f) in filters.iter().enumerate() {
                snapshots.push(snapshot(k, i, SnapshotKind::Periodic, f.belief()));
            }
        }
        ticks.push(RunTick {
            t: st.t,
            truth: st.truth.clone(),
            estimate: filters.iter().map(|f| f.estimate()).collect(),
        });
    }
    Ok(ReplayOutput {
        log: RunLog {
            schema_version: SCHEMA_VERSION,
            strategy,
            scenario_seed: log.scenario.seed,
            sensor_seed: log.seed,
            filter_seed: seed,
            dt: log.config.dt,
            duration: log.config.duration,
            tracked: 1.min(n - 1),
            first_detection: log.first_detection(),
            ticks,
            messages,
            snapshots,
        },
        timings,
    })
}

/// Record then replay in one go, with the same seed for sensing and filtering.
pub fn run(
    scenario: &Scenario,
    grid: &OccupancyGrid,
    df: &DistanceField,
    strategy: StrategyLabel,
    sim: &SimConfig,
    cfg: &ReplayConfig,
    seed: u64,
) -> Result<ReplayOutput, SimError> {
    let log = record(scenario, grid, sim, seed)?;
    replay(&log, grid, df, strategy, cfg, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for text in ["mcl", "naive", "naive:0", "compresspp", "det", "kmeans:0.1", "prorok"] {
            let s = StrategyLabel::parse(text, DEFAULT_ALPHA).unwrap();
            assert_eq!(s.name(), text);
        }
        assert_eq!(StrategyLabel::parse("dnc", DEFAULT_ALPHA).unwrap().name(), "prorok");
        assert!(StrategyLabel::parse("nope", DEFAULT_ALPHA).is_err());
        assert!(StrategyLabel::parse("naive:2", DEFAULT_ALPHA).is_err());
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        hex::decode(text).map_err(serde::de::Error::custom)
    }
}
