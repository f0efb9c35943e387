//! On-disk form of sensor and run logs.
//!
//! Both are JSON lines: a header line, then one line per tick. Bulky numeric
//! data goes to a little-endian binary sidecar next to the main file (`.scans`
//! for lidar ranges, `.snapshots` for belief snapshots).

use super::record::{DetectionEvent, SensorLog, SensorTick};
use super::replay::{BeliefSnapshot, MessageEvent, RunLog, RunTick, SnapshotKind, StrategyLabel};
use super::{Scenario, SimConfig, SimError, SCHEMA_VERSION};
use crate::geometry::Pose;
use crate::mcl::{OdometryDelta, Particle};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

#[derive(Serialize, Deserialize)]
struct SensorHeader {
    schema_version: u32,
    scenario: Scenario,
    seed: u64,
    config: SimConfig,
    n_ticks: usize,
}

#[derive(Serialize, Deserialize)]
struct SensorLine {
    t: f64,
    truth: Vec<Pose>,
    odometry: Vec<OdometryDelta>,
    /// Number of ranges stored in the sidecar per robot (0 = no scan).
    scan_len: Vec<usize>,
    detections: Vec<DetectionEvent>,
}

#[derive(Serialize, Deserialize)]
struct RunHeader {
    schema_version: u32,
    strategy: StrategyLabel,
    scenario_seed: u64,
    sensor_seed: u64,
    filter_seed: u64,
    dt: f64,
    duration: f64,
    tracked: usize,
    first_detection: Option<f64>,
    n_ticks: usize,
    messages: Vec<MessageEvent>,
    n_snapshots: usize,
}

pub fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> SimError + '_ {
    move |source| SimError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, SimError> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn open(path: &Path) -> Result<BufReader<File>, SimError> {
    Ok(BufReader::new(File::open(path).map_err(io_err(path))?))
}

fn write_line<T: Serialize>(w: &mut impl Write, value: &T, path: &Path) -> Result<(), SimError> {
    serde_json::to_writer(&mut *w, value).map_err(|e| SimError::Format(format!("{}: {e}", path.display())))?;
    w.write_all(b"\n").map_err(io_err(path))
}

fn parse_line<T: DeserializeOwned>(
    line: Option<std::io::Result<String>>,
    path: &Path,
    ln: usize,
) -> Result<T, SimError> {
    let line = line
        .ok_or_else(|| SimError::Format(format!("{}: unexpected end at line {ln}", path.display())))?
        .map_err(io_err(path))?;
    serde_json::from_str(&line).map_err(|e| SimError::Format(format!("{}:{ln}: {e}", path.display())))
}

fn check_schema(found: u32) -> Result<(), SimError> {
    if found != SCHEMA_VERSION {
        return Err(SimError::Schema {
            found,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(())
}

fn read_sidecar(path: &Path) -> Result<Vec<u8>, SimError> {
    let mut buf = Vec::new();
    open(path)?.read_to_end(&mut buf).map_err(io_err(path))?;
    Ok(buf)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], SimError> {
        let bytes = self
            .buf
            .get(self.pos..self.pos + N)
            .ok_or_else(|| SimError::Format(format!("{}: truncated at byte {}", self.path.display(), self.pos)))?;
        self.pos += N;
        Ok(bytes.try_into().expect("slice has length N"))
    }

    fn f32(&mut self) -> Result<f32, SimError> {
        Ok(f32::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64, SimError> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    fn u32(&mut self) -> Result<u32, SimError> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn finish(&self) -> Result<(), SimError> {
        if self.pos != self.buf.len() {
            return Err(SimError::Format(format!(
                "{}: {} trailing bytes",
                self.path.display(),
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

/// Writes `log` to `path` plus its `.scans` sidecar.
pub fn write_sensor_log(log: &SensorLog, path: &Path) -> Result<(), SimError> {
    let scans_path = sidecar(path, "scans");
    let mut w = create(path)?;
    let mut bin = create(&scans_path)?;
    let header = SensorHeader {
        schema_version: log.schema_version,
        scenario: log.scenario.clone(),
        seed: log.seed,
        config: log.config.clone(),
        n_ticks: log.ticks.len(),
    };
    write_line(&mut w, &header, path)?;
    for tick in &log.ticks {
        let mut scan_len = Vec::with_capacity(tick.scans.len());
        for scan in &tick.scans {
            let ranges = scan.as_deref().unwrap_or(&[]);
            scan_len.push(ranges.len());
            for r in ranges {
                bin.write_all(&r.to_le_bytes()).map_err(io_err(&scans_path))?;
            }
        }
        let line = SensorLine {
            t: tick.t,
            truth: tick.truth.clone(),
            odometry: tick.odometry.clone(),
            scan_len,
            detections: tick.detections.clone(),
        };
        write_line(&mut w, &line, path)?;
    }
    w.flush().map_err(io_err(path))?;
    bin.flush().map_err(io_err(&scans_path))
}

pub fn read_sensor_log(path: &Path) -> Result<SensorLog, SimError> {
    let mut lines = open(path)?.lines();
    let header: SensorHeader = parse_line(lines.next(), path, 1)?;
    check_schema(header.schema_version)?;
    let scans_path = sidecar(path, "scans");
    let bin = read_sidecar(&scans_path)?;
    let mut cur = Cursor {
        buf: &bin,
        pos: 0,
        path: &scans_path,
    };
    let mut ticks = Vec::with_capacity(header.n_ticks);
    for k in 0..header.n_ticks {
        let line: SensorLine = parse_line(lines.next(), path, k + 2)?;
        let scans = line
            .scan_len
            .iter()
            .map(|&n| match n {
                0 => Ok(None),
                n => (0..n).map(|_| cur.f32()).collect::<Result<Vec<_>, _>>().map(Some),
            })
            .collect::<Result<Vec<_>, _>>()?;
        ticks.push(SensorTick {
            t: line.t,
            truth: line.truth,
            odometry: line.odometry,
            scans,
            detections: line.detections,
        });
    }
    cur.finish()?;
    Ok(SensorLog {
        schema_version: header.schema_version,
        scenario: header.scenario,
        seed: header.seed,
        config: header.config,
        ticks,
    })
}

fn kind_tag(k: SnapshotKind) -> u32 {
    match k {
        SnapshotKind::Periodic => 0,
        SnapshotKind::BeforeFusion => 1,
        SnapshotKind::AfterFusion => 2,
    }
}

/// Writes `log` to `path` plus its `.snapshots` sidecar.
pub fn write_run_log(log: &RunLog, path: &Path) -> Result<(), SimError> {
    let snap_path = sidecar(path, "snapshots");
    let mut w = create(path)?;
    let header = RunHeader {
        schema_version: log.schema_version,
        strategy: log.strategy,
        scenario_seed: log.scenario_seed,
        sensor_seed: log.sensor_seed,
        filter_seed: log.filter_seed,
        dt: log.dt,
        duration: log.duration,
        tracked: log.tracked,
        first_detection: log.first_detection,
        n_ticks: log.ticks.len(),
        messages: log.messages.clone(),
        n_snapshots: log.snapshots.len(),
    };
    write_line(&mut w, &header, path)?;
    for tick in &log.ticks {
        write_line(&mut w, tick, path)?;
    }
    w.flush().map_err(io_err(path))?;
    let mut bin = create(&snap_path)?;
    let mut put = |bytes: &[u8]| bin.write_all(bytes).map_err(io_err(&snap_path));
    for s in &log.snapshots {
        put(&(s.tick as u32).to_le_bytes())?;
        put(&(s.robot as u32).to_le_bytes())?;
        put(&kind_tag(s.kind).to_le_bytes())?;
        put(&(s.particles.len() as u32).to_le_bytes())?;
        for p in &s.particles {
            for v in [p.pose.x, p.pose.y, p.pose.theta, p.weight] {
                put(&v.to_le_bytes())?;
            }
        }
    }
    bin.flush().map_err(io_err(&snap_path))
}

pub fn read_run_log(path: &Path) -> Result<RunLog, SimError> {
    let mut lines = open(path)?.lines();
    let header: RunHeader = parse_line(lines.next(), path, 1)?;
    check_schema(header.schema_version)?;
    let ticks = (0..header.n_ticks)
        .map(|k| parse_line::<RunTick>(lines.next(), path, k + 2))
        .collect::<Result<Vec<_>, _>>()?;
    let snap_path = sidecar(path, "snapshots");
    let bin = read_sidecar(&snap_path)?;
    let mut cur = Cursor {
        buf: &bin,
        pos: 0,
        path: &snap_path,
    };
    let mut snapshots = Vec::with_capacity(header.n_snapshots);
    for _ in 0..header.n_snapshots {
        let tick = cur.u32()? as usize;
        let robot = cur.u32()? as usize;
        let kind = match cur.u32()? {
            0 => SnapshotKind::Periodic,
            1 => SnapshotKind::BeforeFusion,
            2 => SnapshotKind::AfterFusion,
            other => {
                return Err(SimError::Format(format!(
                    "{}: snapshot kind {other}",
                    snap_path.display()
                )))
            }
        };
        let n = cur.u32()? as usize;
        let mut particles = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            let pose = Pose {
                x: cur.f64()?,
                y: cur.f64()?,
                theta: cur.f64()?,
            };
            particles.push(Particle::new(pose, cur.f64()?));
        }
        snapshots.push(BeliefSnapshot {
            tick,
            robot,
            kind,
            particles,
        });
    }
    cur.finish()?;
    Ok(RunLog {
        schema_version: header.schema_version,
        strategy: header.strategy,
        scenario_seed: header.scenario_seed,
        sensor_seed: header.sensor_seed,
        filter_seed: header.filter_seed,
        dt: header.dt,
        duration: header.duration,
        tracked: header.tracked,
        first_detection: header.first_detection,
        ticks,
        messages: header.messages,
        snapshots,
    })
}
