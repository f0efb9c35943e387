use super::CliError;
use crate::compress::{CompressionConfig, KernelConfig};
use crate::eval::{BenchConfig, MetricConfig};
use crate::fusion::{DetectionModel, SummaryConfig, DEFAULT_ALPHA};
use crate::mcl::MclConfig;
use crate::sim::{ReplayConfig, SimConfig, StrategyLabel};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Presets shipped with the binary, selectable by name with `--config`.
pub const PRESETS: [(&str, &str); 3] = [
    ("symmetric", include_str!("../../configs/symmetric.toml")),
    ("office", include_str!("../../configs/office.toml")),
    ("sparse", include_str!("../../configs/sparse.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchSection {
    pub n_particles: Vec<usize>,
    pub repeats: usize,
    pub warmup: usize,
    pub threads: usize,
}

impl Default for BenchSection {
    fn default() -> Self {
        let b = BenchConfig::default();
        Self {
            n_particles: b.n_particles,
            repeats: b.repeats,
            warmup: b.warmup,
            threads: b.threads,
        }
    }
}

/// One experiment: which map, how many recorded runs, and every tunable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Bundled map name or path to a map file.
    pub map: String,
    /// Number of generated scenarios.
    pub scenarios: usize,
    /// Sensor recordings per scenario.
    pub repeats: usize,
    pub seed: u64,
    /// `mcl`, a method name, or `method:alpha`.
    pub strategies: Vec<String>,
    pub alpha: f64,
    pub out: PathBuf,
    /// Also write every replayed run log under `eval/logs`.
    pub write_run_logs: bool,
    /// Sampling step of the convergence curve (s).
    pub curve_step: f64,
    pub sim: SimConfig,
    pub mcl: MclConfig,
    pub compression: CompressionConfig,
    pub kernel: KernelConfig,
    pub detection: DetectionModel,
    pub metrics: MetricConfig,
    pub bench: BenchSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            map: "symmetric".into(),
            scenarios: 10,
            repeats: 3,
            seed: 0,
            strategies: ["mcl", "naive", "std_thinning", "det", "prorok", "kmeans", "compresspp"]
                .map(String::from)
                .to_vec(),
            alpha: DEFAULT_ALPHA,
            out: PathBuf::from("out"),
            write_run_logs: false,
            curve_step: 0.5,
            sim: SimConfig::default(),
            mcl: MclConfig::default(),
            compression: CompressionConfig::default(),
            kernel: KernelConfig::default(),
            detection: DetectionModel::default(),
            metrics: MetricConfig::default(),
            bench: BenchSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Data(format!("{origin}: {e}")))?;
        cfg.validate().map_err(|e| CliError::Data(format!("{origin}: {e}")))?;
        Ok(cfg)
    }

    /// A preset name, a TOML file, or the defaults when `arg` is `None`.
    pub fn load(arg: Option<&str>) -> Result<Self, CliError> {
        let Some(arg) = arg else {
            return Ok(Self::default());
        };
        if let Some((_, text)) = PRESETS.iter().find(|(name, _)| *name == arg) {
            return Self::from_toml(text, arg);
        }
        let path = Path::new(arg);
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, arg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.scenarios == 0 || self.repeats == 0 {
            return Err("scenarios and repeats must be positive".into());
        }
        if self.strategies.is_empty() {
            return Err("strategy list is empty".into());
        }
        self.strategy_labels().map_err(|e| e.to_string())?;
        self.sim.validate().map_err(|e| e.to_string())?;
        self.mcl.validate().map_err(|e| e.to_string())?;
        self.compression.validate().map_err(|e| e.to_string())?;
        self.metrics.validate().map_err(|e| e.to_string())?;
        if !(self.curve_step > 0.0) {
            return Err("curve_step must be positive".into());
        }
        Ok(())
    }

    pub fn strategy_labels(&self) -> Result<Vec<StrategyLabel>, CliError> {
        self.strategies
            .iter()
            .map(|s| StrategyLabel::parse(s, self.alpha).map_err(|e| CliError::Usage(e.to_string())))
            .collect()
    }

    pub fn replay_config(&self) -> ReplayConfig {
        ReplayConfig {
            mcl: self.mcl.clone(),
            summary: self.summary_config(),
            detection_model: self.detection,
            ..Default::default()
        }
    }

    pub fn summary_config(&self) -> SummaryConfig {
        SummaryConfig {
            compression: self.compression.clone(),
            kernel: self.kernel,
        }
    }

    /// Seed of scenario `s`.
    pub fn scenario_seed(&self, s: usize) -> u64 {
        self.seed.wrapping_add(s as u64)
    }

    /// Seed of recording `r` of scenario `s`; also seeds the replayed filters.
    pub fn run_seed(&self, s: usize, r: usize) -> u64 {
        self.scenario_seed(s).wrapping_mul(1000).wrapping_add(r as u64)
    }
}
