//! The `cmcl` command line: record sensor logs, replay them per strategy,
//! benchmark, emit fixtures, and inspect maps.

mod commands;
pub mod config;
pub mod fixture;
pub mod svg;

pub use config::ExperimentConfig;

use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;
use thiserror::Error;

/// Version tag of every CSV this tool writes (first column of each row).
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<crate::sim::SimError> for CliError {
    fn from(e: crate::sim::SimError) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "cmcl", version, about = "Collaborative Monte Carlo localization experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by the experiment commands.
#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Preset name (symmetric, office, sparse) or path to a TOML config.
    #[arg(long)]
    pub config: Option<String>,
    /// Base seed; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated strategies (mcl, naive, std_thinning, det, prorok, kmeans,
    /// compresspp; `name:alpha` sets alpha).
    #[arg(long, value_delimiter = ',')]
    pub strategies: Option<Vec<String>>,
    /// Particle count(s); overrides the config.
    #[arg(long, value_delimiter = ',')]
    pub particles: Option<Vec<usize>>,
    /// Recordings per scenario, or timed repetitions for `bench`.
    #[arg(long)]
    pub repeats: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate scenarios and record strategy-independent sensor logs.
    Record(Common),
    /// Replay every strategy over the recorded logs and write metrics.
    Evaluate(Common),
    /// Time compression and fusion per strategy and particle count.
    Bench(Common),
    /// Emit a point fixture and each method's representatives as CSV and SVG.
    Fixture {
        /// Fixture name (diamond_center).
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print size, occupancy and symmetry of a map.
    MapInfo {
        /// Bundled map name or path to a map file.
        map: String,
    },
}

/// Loads the config and applies command-line overrides.
fn resolve(c: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(c.config.as_deref())?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &c.out {
        cfg.out = out.clone();
    }
    if let Some(s) = &c.strategies {
        cfg.strategies = s.clone();
    }
    if let Some(r) = c.repeats {
        cfg.repeats = r;
        cfg.bench.repeats = r;
    }
    if let Some(p) = &c.particles {
        cfg.mcl.n_particles = p[0];
        cfg.bench.n_particles = p.clone();
    }
    cfg.validate().map_err(CliError::Usage)?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Record(c) => commands::record(&resolve(&c)?),
        Command::Evaluate(c) => commands::evaluate(&resolve(&c)?),
        Command::Bench(c) => commands::bench(&resolve(&c)?),
        Command::Fixture { name, common } => commands::fixture(&name, &resolve(&common)?),
        Command::MapInfo { map } => commands::map_info(&map),
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
