//! Localization metrics, aggregation across runs, and runtime benchmarks.

mod bench;
pub mod stats;

pub use bench::{benchmark, time_fusion, BenchConfig, BenchRow};
pub use stats::{bootstrap_ci, wilcoxon_signed_rank, Interval};

use crate::geometry::angle_distance;
use crate::numeric::median;
use crate::sim::{RunLog, RunTimings};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("run log has no samples at or after the time origin")]
    NoSamples,
    #[error("run log has no ground truth for robot {0}")]
    NoGroundTruth(usize),
    #[error("run never converged")]
    NotConverged,
    #[error("invalid metric setting: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    /// Position error bound for "converged" (m).
    pub pos_threshold: f64,
    /// Heading error bound for "converged" (rad).
    pub ang_threshold: f64,
    /// Fraction of the post-convergence time allowed outside the bounds.
    pub divergence_budget: f64,
    /// Convergence must happen within this fraction of the sequence.
    pub convergence_window: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            pos_threshold: 0.3,
            ang_threshold: 0.3,
            divergence_budget: 0.05,
            convergence_window: 0.9,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if !(self.pos_threshold > 0.0 && self.ang_threshold > 0.0) {
            return Err(EvalError::Config("thresholds must be positive".into()));
        }
        for (name, v) in [
            ("divergence_budget", self.divergence_budget),
            ("convergence_window", self.convergence_window),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(EvalError::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

/// Tracking error of one sample; `t` is relative to the time origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackError {
    pub t: f64,
    pub pos: f64,
    pub ang: f64,
}

impl TrackError {
    pub fn within(&self, cfg: &MetricConfig) -> bool {
        self.pos < cfg.pos_threshold && self.ang < cfg.ang_threshold
    }
}

/// Errors of the tracked robot from the first detection on (from the start
/// when nothing was ever detected).
pub fn track_errors(log: &RunLog) -> Result<Vec<TrackError>, EvalError> {
    let origin = log.first_detection.unwrap_or(0.0);
    let r = log.tracked;
    let mut out = Vec::with_capacity(log.ticks.len());
    for tick in log.ticks.iter().filter(|t| t.t >= origin) {
        let (Some(truth), Some(est)) = (tick.truth.get(r), tick.estimate.get(r)) else {
            return Err(EvalError::NoGroundTruth(r));
        };
        out.push(TrackError {
            t: tick.t - origin,
            pos: truth.position().distance(&est.position()),
            ang: angle_distance(truth.theta, est.theta),
        });
    }
    if out.is_empty() {
        return Err(EvalError::NoSamples);
    }
    Ok(out)
}

fn first_within(errors: &[TrackError], cfg: &MetricConfig) -> Option<usize> {
    errors.iter().position(|e| e.within(cfg))
}

pub fn convergence_time(log: &RunLog, cfg: &MetricConfig) -> Result<Option<f64>, EvalError> {
    let errors = track_errors(log)?;
    Ok(first_within(&errors, cfg).map(|i| errors[i].t))
}

/// Time each sample stands for: the gap to the next sample (the last one
/// repeats the previous gap).
fn sample_spans(errors: &[TrackError], dt: f64) -> Vec<f64> {
    (0..errors.len())
        .map(|i| match (errors.get(i + 1), i.checked_sub(1)) {
            (Some(next), _) => next.t - errors[i].t,
            (None, Some(prev)) => errors[i].t - errors[prev].t,
            (None, None) => dt,
        })
        .collect()
}

fn success_from(errors: &[TrackError], dt: f64, cfg: &MetricConfig) -> bool {
    let Some(i) = first_within(errors, cfg) else {
        return false;
    };
    let end = errors.last().expect("nonempty").t;
    let spans = sample_spans(errors, dt);
    let total = end + spans.last().copied().unwrap_or(dt);
    if errors[i].t > cfg.convergence_window * total {
        return false;
    }
    let remaining = total - errors[i].t;
    let outside: f64 = errors[i..]
        .iter()
        .zip(&spans[i..])
        .filter(|(e, _)| !e.within(cfg))
        .map(|(_, s)| s)
        .sum();
    outside < cfg.divergence_budget * remaining
}

/// Converged within the window and stayed within bounds for all but the
/// divergence budget of the remaining time.
pub fn success(log: &RunLog, cfg: &MetricConfig) -> Result<bool, EvalError> {
    Ok(success_from(&track_errors(log)?, log.dt, cfg))
}

/// Mean absolute heading error (rad) and mean position error (m) after convergence.
pub fn ate(log: &RunLog, cfg: &MetricConfig) -> Result<(f64, f64), EvalError> {
    let errors = track_errors(log)?;
    ate_from(&errors, cfg)
}

fn ate_from(errors: &[TrackError], cfg: &MetricConfig) -> Result<(f64, f64), EvalError> {
    let i = first_within(errors, cfg).ok_or(EvalError::NotConverged)?;
    let tail = &errors[i..];
    let n = tail.len() as f64;
    Ok((
        tail.iter().map(|e| e.ang).sum::<f64>() / n,
        tail.iter().map(|e| e.pos).sum::<f64>() / n,
    ))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
}

impl TimingStats {
    pub fn from_samples(ms: &[f64]) -> Self {
        if ms.is_empty() {
            return Self::default();
        }
        Self {
            count: ms.len(),
            mean: ms.iter().sum::<f64>() / ms.len() as f64,
            median: median(ms).unwrap_or(0.0),
            max: ms.iter().copied().fold(f64::MIN, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub strategy: String,
    pub scenario_seed: u64,
    pub sensor_seed: u64,
    pub converged: bool,
    pub convergence_time: Option<f64>,
    pub success: bool,
    pub ate_trans: Option<f64>,
    pub ate_rot: Option<f64>,
    pub messages: usize,
    pub bytes_sent: usize,
    pub fusion_ms: TimingStats,
    pub compression_ms: TimingStats,
}

pub fn summarize_run(log: &RunLog, timings: &RunTimings, cfg: &MetricConfig) -> Result<RunSummary, EvalError> {
    cfg.validate()?;
    let errors = track_errors(log)?;
    let convergence_time = first_within(&errors, cfg).map(|i| errors[i].t);
    let success = success_from(&errors, log.dt, cfg);
    assert!(
        !success || convergence_time.is_some_and(|t| t <= cfg.convergence_window * (errors.last().unwrap().t + log.dt))
    );
    let ate = ate_from(&errors, cfg).ok();
    Ok(RunSummary {
        strategy: log.strategy.name(),
        scenario_seed: log.scenario_seed,
        sensor_seed: log.sensor_seed,
        converged: convergence_time.is_some(),
        convergence_time,
        success,
        ate_trans: ate.map(|a| a.1),
        ate_rot: ate.map(|a| a.0),
        messages: log.messages.len(),
        bytes_sent: log.bytes_sent(),
        fusion_ms: TimingStats::from_samples(&timings.fusion_ms),
        compression_ms: TimingStats::from_samples(&timings.compression_ms),
    })
}

/// Per-strategy means over runs with 95% bootstrap intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyAggregate {
    pub strategy: String,
    pub runs: usize,
    pub success_rate: Interval,
    /// Over converged runs only.
    pub convergence_time: Option<Interval>,
    pub ate_trans: Option<Interval>,
    pub ate_rot: Option<Interval>,
    pub bytes_per_message: f64,
    pub fusion_ms: f64,
    pub compression_ms: f64,
}

pub const BOOTSTRAP_RESAMPLES: usize = 2000;

/// Groups summaries by strategy, keeping first-seen order.
pub fn aggregate(summaries: &[RunSummary], seed: u64) -> Vec<StrategyAggregate> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&RunSummary>> = BTreeMap::new();
    for s in summaries {
        if !groups.contains_key(s.strategy.as_str()) {
            order.push(&s.strategy);
        }
        groups.entry(&s.strategy).or_default().push(s);
    }
    let ci = |v: Vec<f64>| (!v.is_empty()).then(|| bootstrap_ci(&v, BOOTSTRAP_RESAMPLES, seed));
    order
        .into_iter()
        .map(|name| {
            let g = &groups[name];
            let msgs: usize = g.iter().map(|s| s.messages).sum();
            let bytes: usize = g.iter().map(|s| s.bytes_sent).sum();
            let mean_of = |f: &dyn Fn(&RunSummary) -> TimingStats| {
                let with: Vec<f64> = g.iter().map(|s| f(s)).filter(|t| t.count > 0).map(|t| t.mean).collect();
                if with.is_empty() {
                    0.0
                } else {
                    with.iter().sum::<f64>() / with.len() as f64
                }
            };
            StrategyAggregate {
                strategy: name.to_string(),
                runs: g.len(),
                success_rate: bootstrap_ci(
                    &g.iter().map(|s| if s.success { 1.0 } else { 0.0 }).collect::<Vec<_>>(),
                    BOOTSTRAP_RESAMPLES,
                    seed,
                ),
                convergence_time: ci(g.iter().filter_map(|s| s.convergence_time).collect()),
                ate_trans: ci(g.iter().filter_map(|s| s.ate_trans).collect()),
                ate_rot: ci(g.iter().filter_map(|s| s.ate_rot).collect()),
                bytes_per_message: if msgs == 0 { 0.0 } else { bytes as f64 / msgs as f64 },
                fusion_ms: mean_of(&|s| s.fusion_ms),
                compression_ms: mean_of(&|s| s.compression_ms),
            }
        })
        .collect()
}

/// Fraction of runs within the convergence bounds at each multiple of `step`
/// seconds after the time origin. Runs shorter than a given time hold their
/// last sample.
pub fn convergence_curve(logs: &[&RunLog], cfg: &MetricConfig, step: f64) -> Result<Vec<(f64, f64)>, EvalError> {
    if !(step > 0.0) {
        return Err(EvalError::Config("time step must be positive".into()));
    }
    let series = logs.iter().map(|l| track_errors(l)).collect::<Result<Vec<_>, _>>()?;
    let end = series.iter().map(|s| s.last().unwrap().t).fold(0.0, f64::max);
    let n_steps = (end / step).floor() as usize + 1;
    let mut cursors = vec![0usize; series.len()];
    let mut out = Vec::with_capacity(n_steps);
    for k in 0..n_steps {
        let t = k as f64 * step;
        let mut within = 0;
        for (s, c) in series.iter().zip(cursors.iter_mut()) {
            while *c + 1 < s.len() && s[*c + 1].t <= t + 1e-9 {
                *c += 1;
            }
            if s[*c].within(cfg) {
                within += 1;
            }
        }
        out.push((t, within as f64 / series.len().max(1) as f64));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use crate::sim::{RunTick, StrategyLabel, SCHEMA_VERSION};

    /// Log at 1 s steps whose position error at time t is `err(t)`.
    fn log_with(n: usize, origin: Option<f64>, err: impl Fn(f64) -> (f64, f64)) -> RunLog {
        let ticks = (0..n)
            .map(|k| {
                let t = k as f64;
                let (p, a) = err(t);
                let truth = Pose::new(1.0, 1.0, 0.5);
                RunTick {
                    t,
                    truth: vec![truth, truth],
                    estimate: vec![truth, Pose::new(1.0 + p, 1.0, 0.5 + a)],
                }
            })
            .collect();
        RunLog {
            schema_version: SCHEMA_VERSION,
            strategy: StrategyLabel::Mcl,
            scenario_seed: 0,
            sensor_seed: 0,
            filter_seed: 0,
            dt: 1.0,
            duration: n as f64,
            tracked: 1,
            first_detection: origin,
            ticks,
            messages: vec![],
            snapshots: vec![],
        }
    }

    #[test]
    fn perfect_tracking() {
        let log = log_with(100, Some(0.0), |_| (0.0, 0.0));
        let cfg = MetricConfig::default();
        assert_eq!(convergence_time(&log, &cfg).unwrap(), Some(0.0));
        assert!(success(&log, &cfg).unwrap());
        assert_eq!(ate(&log, &cfg).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn constant_offset_never_converges() {
        let log = log_with(100, Some(0.0), |_| (0.5, 0.0));
        let cfg = MetricConfig::default();
        assert_eq!(convergence_time(&log, &cfg).unwrap(), None);
        assert!(!success(&log, &cfg).unwrap());
        assert_eq!(ate(&log, &cfg), Err(EvalError::NotConverged));
    }

    #[test]
    fn threshold_boundary() {
        let log = log_with(100, Some(0.0), |t| (if t < 10.0 { 0.31 } else { 0.29 }, 0.0));
        assert_eq!(convergence_time(&log, &MetricConfig::default()).unwrap(), Some(10.0));
    }

    #[test]
    fn late_convergence_fails() {
        let log = log_with(100, Some(0.0), |t| (if t < 95.0 { 1.0 } else { 0.0 }, 0.0));
        let cfg = MetricConfig::default();
        assert!(convergence_time(&log, &cfg).unwrap().is_some());
        assert!(!success(&log, &cfg).unwrap());
    }

    #[test]
    fn divergence_budget_boundary() {
        let cfg = MetricConfig::default();
        let bad = log_with(100, Some(0.0), |t| {
            (if (50.0..56.0).contains(&t) { 1.0 } else { 0.0 }, 0.0)
        });
        assert!(!success(&bad, &cfg).unwrap());
        let ok = log_with(100, Some(0.0), |t| {
            (if (50.0..54.0).contains(&t) { 1.0 } else { 0.0 }, 0.0)
        });
        assert!(success(&ok, &cfg).unwrap());
    }

    #[test]
    fn constant_error_ate() {
        let log = log_with(50, Some(0.0), |_| (0.1, 0.02));
        let (rot, trans) = ate(&log, &MetricConfig::default()).unwrap();
        assert!((rot - 0.02).abs() < 1e-9 && (trans - 0.1).abs() < 1e-9);
    }

    #[test]
    fn time_origin_is_first_detection() {
        let log = log_with(100, Some(20.0), |t| (if t < 30.0 { 1.0 } else { 0.0 }, 0.0));
        assert_eq!(convergence_time(&log, &MetricConfig::default()).unwrap(), Some(10.0));
    }

    #[test]
    fn aggregate_groups_by_strategy() {
        let cfg = MetricConfig::default();
        let good = log_with(20, Some(0.0), |_| (0.0, 0.0));
        let bad = log_with(20, Some(0.0), |_| (1.0, 0.0));
        let s: Vec<RunSummary> = [&good, &bad, &good]
            .iter()
            .map(|l| summarize_run(l, &RunTimings::default(), &cfg).unwrap())
            .collect();
        let agg = aggregate(&s, 1);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].runs, 3);
        assert!((agg[0].success_rate.mean - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn curve_fractions() {
        let cfg = MetricConfig::default();
        let a = log_with(10, Some(0.0), |t| (if t < 5.0 { 1.0 } else { 0.0 }, 0.0));
        let b = log_with(10, Some(0.0), |_| (0.0, 0.0));
        let c = convergence_curve(&[&a, &b], &cfg, 1.0).unwrap();
        assert_eq!(c.len(), 10);
        assert_eq!(c[0], (0.0, 0.5));
        assert_eq!(c[9], (9.0, 1.0));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = MetricConfig {
            divergence_budget: 1.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
