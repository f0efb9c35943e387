use super::config::ExperimentConfig;
use super::fixture::representatives;
use super::svg::{bar_chart, scatter, time_series, Layer};
use super::{CliError, CSV_SCHEMA_VERSION};
use crate::compress::fixture::diamond_center;
use crate::eval::{aggregate, benchmark, convergence_curve, summarize_run, BenchConfig, RunSummary};
use crate::map::{CellState, DistanceField, OccupancyGrid};
use crate::sim::logio::{read_sensor_log, write_run_log, write_sensor_log};
use crate::sim::{generate_scenario, maps, record as record_log, replay, Planner, SensorLog, StrategyLabel};
use crate::wire::Method;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

fn data_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| data_err(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| data_err(path, e))
}

/// CSV writer whose rows all start with the schema version.
struct Csv {
    path: PathBuf,
    w: csv::Writer<fs::File>,
}

impl Csv {
    fn create(path: PathBuf, header: &[&str]) -> Result<Self, CliError> {
        let mut w = csv::Writer::from_path(&path).map_err(|e| data_err(&path, e))?;
        let mut row = vec!["schema_version"];
        row.extend_from_slice(header);
        w.write_record(&row).map_err(|e| data_err(&path, e))?;
        Ok(Self { path, w })
    }

    fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        let mut row = vec![CSV_SCHEMA_VERSION.to_string()];
        row.extend_from_slice(fields);
        self.w.write_record(&row).map_err(|e| data_err(&self.path, e))
    }

    fn finish(mut self) -> Result<(), CliError> {
        self.w.flush().map_err(|e| data_err(&self.path, e))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn load_map(name: &str) -> Result<OccupancyGrid, CliError> {
    maps::load(name).map_err(|e| CliError::Data(format!("map {name}: {e}")))
}

fn runs_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.join("runs")
}

fn run_file(s: usize, r: usize) -> String {
    format!("run_{s:03}_{r}.jsonl")
}

pub fn record(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let grid = load_map(&cfg.map)?;
    let planner = Planner::new(&grid, cfg.sim.robot_radius);
    let dir = runs_dir(cfg);
    create_dir(&dir)?;
    let config_path = cfg.out.join("config.toml");
    let text = toml::to_string(cfg).map_err(|e| data_err(&config_path, e))?;
    write_file(&config_path, &text)?;

    let scenarios = (0..cfg.scenarios)
        .into_par_iter()
        .map(|s| generate_scenario(&planner, &cfg.map, cfg.scenario_seed(s), &cfg.sim))
        .collect::<Result<Vec<_>, _>>()?;
    for (s, sc) in scenarios.iter().enumerate() {
        write_file(&dir.join(format!("scenario_{s:03}.toml")), &sc.to_toml())?;
    }
    let cells: Vec<(usize, usize)> = (0..cfg.scenarios)
        .flat_map(|s| (0..cfg.repeats).map(move |r| (s, r)))
        .collect();
    let logs = cells
        .par_iter()
        .map(|&(s, r)| {
            let log = record_log(&scenarios[s], &grid, &cfg.sim, cfg.run_seed(s, r))?;
            write_sensor_log(&log, &dir.join(run_file(s, r)))?;
            Ok::<_, CliError>(log)
        })
        .collect::<Result<Vec<SensorLog>, _>>()?;

    let mut manifest = Csv::create(
        dir.join("manifest.csv"),
        &[
            "scenario",
            "repeat",
            "scenario_seed",
            "run_seed",
            "file",
            "detections",
            "first_detection",
            "digest",
        ],
    )?;
    for (&(s, r), log) in cells.iter().zip(&logs) {
        let digest = log.digest();
        manifest.row(&[
            s.to_string(),
            r.to_string(),
            cfg.scenario_seed(s).to_string(),
            cfg.run_seed(s, r).to_string(),
            run_file(s, r),
            log.detection_count().to_string(),
            opt(log.first_detection()),
            digest.clone(),
        ])?;
        println!("{}  {}", &digest[..16], run_file(s, r));
    }
    manifest.finish()?;
    println!("recorded {} runs in {}", logs.len(), dir.display());
    Ok(())
}

struct ManifestEntry {
    scenario: usize,
    repeat: usize,
    run_seed: u64,
    file: String,
}

fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>, CliError> {
    let path = dir.join("manifest.csv");
    let mut rd = csv::Reader::from_path(&path).map_err(|e| data_err(&path, e))?;
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| data_err(&path, e))?;
        let field = |i: usize| rec.get(i).ok_or_else(|| data_err(&path, "short row"));
        let version: u32 = field(0)?.parse().map_err(|e| data_err(&path, e))?;
        if version != CSV_SCHEMA_VERSION {
            return Err(data_err(
                &path,
                format!("schema version {version} is not supported (expected {CSV_SCHEMA_VERSION})"),
            ));
        }
        let num = |i: usize| -> Result<u64, CliError> { field(i)?.parse().map_err(|e| data_err(&path, e)) };
        out.push(ManifestEntry {
            scenario: num(1)? as usize,
            repeat: num(2)? as usize,
            run_seed: num(4)?,
            file: field(5)?.to_string(),
        });
    }
    if out.is_empty() {
        return Err(data_err(&path, "no runs recorded"));
    }
    Ok(out)
}

pub fn evaluate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let dir = runs_dir(cfg);
    let entries = read_manifest(&dir)?;
    let logs = entries
        .par_iter()
        .map(|e| read_sensor_log(&dir.join(&e.file)).map_err(CliError::from))
        .collect::<Result<Vec<_>, _>>()?;
    let mut grids: BTreeMap<String, (OccupancyGrid, DistanceField)> = BTreeMap::new();
    for log in &logs {
        if !grids.contains_key(&log.scenario.map) {
            let g = load_map(&log.scenario.map)?;
            let df = DistanceField::new(&g);
            grids.insert(log.scenario.map.clone(), (g, df));
        }
    }
    let strategies = cfg.strategy_labels()?;
    let rcfg = cfg.replay_config();
    let out_dir = cfg.out.join("eval");
    create_dir(&out_dir)?;
    let log_dir = out_dir.join("logs");
    if cfg.write_run_logs {
        create_dir(&log_dir)?;
    }

    let cells: Vec<(usize, usize)> = (0..strategies.len())
        .flat_map(|k| (0..logs.len()).map(move |i| (k, i)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(k, i)| {
            let (grid, df) = &grids[&logs[i].scenario.map];
            let out = replay(&logs[i], grid, df, strategies[k], &rcfg, entries[i].run_seed)?;
            if cfg.write_run_logs {
                let name = format!(
                    "{}_{:03}_{}.jsonl",
                    strategies[k].name().replace(':', "_"),
                    entries[i].scenario,
                    entries[i].repeat
                );
                write_run_log(&out.log, &log_dir.join(name))?;
            }
            let summary =
                summarize_run(&out.log, &out.timings, &cfg.metrics).map_err(|e| CliError::Data(e.to_string()))?;
            Ok::<_, CliError>((summary, out.log))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut runs = Csv::create(
        out_dir.join("runs.csv"),
        &[
            "strategy",
            "scenario",
            "repeat",
            "run_seed",
            "converged",
            "convergence_time",
            "success",
            "ate_trans",
            "ate_rot",
            "messages",
            "bytes_sent",
            "fusion_ms_mean",
            "compression_ms_mean",
        ],
    )?;
    for (&(_, i), (s, _)) in cells.iter().zip(&results) {
        runs.row(&[
            s.strategy.clone(),
            entries[i].scenario.to_string(),
            entries[i].repeat.to_string(),
            entries[i].run_seed.to_string(),
            s.converged.to_string(),
            opt(s.convergence_time),
            s.success.to_string(),
            opt(s.ate_trans),
            opt(s.ate_rot),
            s.messages.to_string(),
            s.bytes_sent.to_string(),
            format!("{}", s.fusion_ms.mean),
            format!("{}", s.compression_ms.mean),
        ])?;
    }
    runs.finish()?;

    let summaries: Vec<RunSummary> = results.iter().map(|(s, _)| s.clone()).collect();
    let agg = aggregate(&summaries, cfg.seed);
    let mut agg_csv = Csv::create(
        out_dir.join("aggregate.csv"),
        &[
            "strategy",
            "runs",
            "success_rate",
            "success_lo",
            "success_hi",
            "convergence_time",
            "convergence_lo",
            "convergence_hi",
            "ate_trans",
            "ate_trans_lo",
            "ate_trans_hi",
            "ate_rot",
            "ate_rot_lo",
            "ate_rot_hi",
            "bytes_per_message",
            "fusion_ms",
            "compression_ms",
        ],
    )?;
    let triple = |i: Option<crate::eval::Interval>| match i {
        Some(i) => [i.mean.to_string(), i.lo.to_string(), i.hi.to_string()],
        None => Default::default(),
    };
    println!(
        "{:<16} {:>5} {:>8} {:>18} {:>10} {:>10} {:>10}",
        "strategy", "runs", "success", "95% CI", "conv [s]", "ATE [m]", "bytes/msg"
    );
    for a in &agg {
        let mut row = vec![a.strategy.clone(), a.runs.to_string()];
        row.extend(triple(Some(a.success_rate)));
        row.extend(triple(a.convergence_time));
        row.extend(triple(a.ate_trans));
        row.extend(triple(a.ate_rot));
        row.push(a.bytes_per_message.to_string());
        row.push(a.fusion_ms.to_string());
        row.push(a.compression_ms.to_string());
        agg_csv.row(&row)?;
        println!(
            "{:<16} {:>5} {:>7.1}% {:>8.1}%..{:>6.1}% {:>10} {:>10} {:>10.0}",
            a.strategy,
            a.runs,
            100.0 * a.success_rate.mean,
            100.0 * a.success_rate.lo,
            100.0 * a.success_rate.hi,
            a.convergence_time.map_or("-".into(), |c| format!("{:.1}", c.mean)),
            a.ate_trans.map_or("-".into(), |c| format!("{:.3}", c.mean)),
            a.bytes_per_message
        );
    }
    agg_csv.finish()?;

    let mut curves = Vec::new();
    let mut curve_csv = Csv::create(
        out_dir.join("convergence.csv"),
        &["strategy", "t", "fraction_converged"],
    )?;
    for (k, label) in strategies.iter().enumerate() {
        let of_strategy: Vec<_> = cells
            .iter()
            .zip(&results)
            .filter(|((kk, _), _)| *kk == k)
            .map(|(_, (_, log))| log)
            .collect();
        let curve =
            convergence_curve(&of_strategy, &cfg.metrics, cfg.curve_step).map_err(|e| CliError::Data(e.to_string()))?;
        for (t, f) in &curve {
            curve_csv.row(&[label.name(), t.to_string(), f.to_string()])?;
        }
        curves.push((label.name(), curve));
    }
    curve_csv.finish()?;

    let labels: Vec<String> = agg.iter().map(|a| a.strategy.clone()).collect();
    let rates: Vec<f64> = agg.iter().map(|a| a.success_rate.mean).collect();
    let cis: Vec<(f64, f64)> = agg.iter().map(|a| (a.success_rate.lo, a.success_rate.hi)).collect();
    write_file(
        &out_dir.join("success.svg"),
        &bar_chart(
            &format!("Success rate ({})", cfg.map),
            "success rate",
            &labels,
            &rates,
            Some(&cis),
        ),
    )?;
    write_file(
        &out_dir.join("convergence.svg"),
        &time_series(
            "Fraction of runs within bounds",
            "time since first detection [s]",
            "fraction",
            &curves,
        ),
    )?;
    println!("wrote {}", out_dir.display());
    Ok(())
}

pub fn bench(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let methods: Vec<Method> = cfg
        .strategy_labels()?
        .iter()
        .filter_map(StrategyLabel::method)
        .collect();
    if methods.is_empty() {
        return Err(CliError::Usage("bench needs at least one exchange strategy".into()));
    }
    let bcfg = BenchConfig {
        methods,
        n_particles: cfg.bench.n_particles.clone(),
        repeats: cfg.bench.repeats,
        warmup: cfg.bench.warmup,
        threads: cfg.bench.threads,
        seed: cfg.seed,
        summary: cfg.summary_config(),
        detection_model: cfg.detection,
    };
    if bcfg.n_particles.iter().any(|&n| n < 4) {
        return Err(CliError::Usage("particle counts must be at least 4".into()));
    }
    let rows = benchmark(&bcfg);
    create_dir(&cfg.out)?;
    let mut csv = Csv::create(
        cfg.out.join("bench.csv"),
        &["strategy", "n_particles", "compression_ms", "fusion_ms", "bytes"],
    )?;
    println!(
        "{:<14} {:>8} {:>16} {:>12} {:>8}",
        "strategy", "N", "compression [ms]", "fusion [ms]", "bytes"
    );
    for r in &rows {
        csv.row(&[
            r.method.name().to_string(),
            r.n_particles.to_string(),
            r.compression_ms.to_string(),
            r.fusion_ms.to_string(),
            r.bytes.to_string(),
        ])?;
        println!(
            "{:<14} {:>8} {:>16.3} {:>12.3} {:>8}",
            r.method.name(),
            r.n_particles,
            r.compression_ms,
            r.fusion_ms,
            r.bytes
        );
    }
    csv.finish()
}

/// Representatives per method in the fixture output.
pub const FIXTURE_REPRESENTATIVES: usize = 8;

pub fn fixture(name: &str, cfg: &ExperimentConfig) -> Result<(), CliError> {
    if name != "diamond_center" {
        return Err(CliError::Usage(format!(
            "unknown fixture {name:?} (available: diamond_center)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let f = diamond_center(&mut rng);
    let dir = cfg.out.join("fixture");
    create_dir(&dir)?;
    let mut pts = Csv::create(dir.join("points.csv"), &["x", "y", "region"])?;
    for (p, l) in f.points.iter().zip(&f.labels) {
        pts.row(&[p.x.to_string(), p.y.to_string(), l.to_string()])?;
    }
    pts.finish()?;
    let input: Vec<(f64, f64)> = f.points.iter().map(|p| (p.x, p.y)).collect();
    let boxes: Vec<[f64; 4]> = f.regions.iter().map(|b| [b.xmin, b.xmax, b.ymin, b.ymax]).collect();
    write_file(
        &dir.join("points.svg"),
        &scatter(
            "diamond_center input",
            &[Layer {
                name: "input",
                points: &input,
                radius: 2.5,
            }],
            &boxes,
        ),
    )?;
    for m in Method::ALL {
        let reps = representatives(&f.points, m, FIXTURE_REPRESENTATIVES, &mut rng)
            .map_err(|e| CliError::Data(format!("{m}: {e}")))?;
        let mut csv = Csv::create(dir.join(format!("{}.csv", m.name())), &["method", "x", "y", "weight"])?;
        for r in &reps {
            csv.row(&[
                m.name().to_string(),
                r.point.x.to_string(),
                r.point.y.to_string(),
                r.weight.to_string(),
            ])?;
        }
        csv.finish()?;
        let chosen: Vec<(f64, f64)> = reps.iter().map(|r| (r.point.x, r.point.y)).collect();
        let covered = f.regions_covered(&reps.iter().map(|r| r.point).collect::<Vec<_>>());
        write_file(
            &dir.join(format!("{}.svg", m.name())),
            &scatter(
                &format!("{} ({} representatives, {covered}/5 regions)", m.name(), reps.len()),
                &[
                    Layer {
                        name: "input",
                        points: &input,
                        radius: 2.0,
                    },
                    Layer {
                        name: m.name(),
                        points: &chosen,
                        radius: 5.0,
                    },
                ],
                &boxes,
            ),
        )?;
        println!(
            "{:<14} {:>3} representatives, {covered}/5 regions covered",
            m.name(),
            reps.len()
        );
    }
    println!("wrote {}", dir.display());
    Ok(())
}

/// Whether the grid is unchanged by a half turn about its center.
fn half_turn_symmetric(g: &OccupancyGrid) -> bool {
    let c = g.cells();
    let n = c.len();
    (0..n).all(|i| c[i] == c[n - 1 - i])
}

pub fn map_info(name: &str) -> Result<(), CliError> {
    let g = load_map(name)?;
    let (w, h) = g.extent();
    let cell_area = g.resolution() * g.resolution();
    println!("map:          {name}");
    println!("cells:        {} x {} at {} m", g.width(), g.height(), g.resolution());
    println!("extent:       {w:.2} m x {h:.2} m");
    for (label, state) in [
        ("free", CellState::Free),
        ("occupied", CellState::Occupied),
        ("unknown", CellState::Unknown),
    ] {
        let n = g.count(state);
        println!("{:<13} {n} cells ({:.2} m²)", format!("{label}:"), n as f64 * cell_area);
    }
    println!(
        "half-turn symmetric: {}",
        if half_turn_symmetric(&g) { "yes" } else { "no" }
    );
    if let Some(m) = maps::bundled(name) {
        println!("particles:    {}", m.particles);
        println!("about:        {}", m.description);
    }
    Ok(())
}
