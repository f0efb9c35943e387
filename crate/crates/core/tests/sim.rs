use cmcl_core::eval::{aggregate, convergence_curve, summarize_run, track_errors, MetricConfig};
use cmcl_core::fusion::{FusionStrategy, DEFAULT_ALPHA};
use cmcl_core::map::DistanceField;
use cmcl_core::sim::logio::{read_run_log, read_sensor_log, write_run_log, write_sensor_log};
use cmcl_core::sim::*;
use cmcl_core::wire::{decode, Method};

fn short_sim() -> SimConfig {
    SimConfig {
        duration: 12.0,
        ..Default::default()
    }
}

fn small_replay() -> ReplayConfig {
    let mut cfg = ReplayConfig::default();
    cfg.mcl.n_particles = 300;
    cfg
}

fn exchange(m: Method) -> StrategyLabel {
    StrategyLabel::Exchange(FusionStrategy::new(m, DEFAULT_ALPHA).unwrap())
}

#[test]
fn recording_is_deterministic_and_independent_of_strategy() {
    let grid = maps::load("office").unwrap();
    let sim = short_sim();
    let planner = Planner::new(&grid, sim.robot_radius);
    let sc = generate_scenario(&planner, "office", 5, &sim).unwrap();
    assert_eq!(sc, generate_scenario(&planner, "office", 5, &sim).unwrap());
    assert_eq!(Scenario::from_toml(&sc.to_toml()).unwrap(), sc);

    let a = record(&sc, &grid, &sim, 17).unwrap();
    let b = record(&sc, &grid, &sim, 17).unwrap();
    assert_eq!(a.digest(), b.digest());
    assert_ne!(a.digest(), record(&sc, &grid, &sim, 18).unwrap().digest());
    assert_eq!(a.ticks.len(), sim.n_ticks());
    let first = a.first_detection().expect("scenario guarantees an early sighting");
    assert!(first <= sim.first_view_window + 1e-9);
}

#[test]
fn every_strategy_replays_and_sends_decodable_messages() {
    let grid = maps::load("symmetric").unwrap();
    let df = DistanceField::new(&grid);
    let sim = short_sim();
    let planner = Planner::new(&grid, sim.robot_radius);
    let sc = generate_scenario(&planner, "symmetric", 1, &sim).unwrap();
    let log = record(&sc, &grid, &sim, 3).unwrap();
    let cfg = small_replay();
    let metrics = MetricConfig::default();
    let mut summaries = Vec::new();
    let mut labels = vec![StrategyLabel::Mcl];
    labels.extend(Method::ALL.iter().map(|&m| {
        if m == Method::Det {
            StrategyLabel::Exchange(FusionStrategy::new(m, 0.0).unwrap())
        } else {
            exchange(m)
        }
    }));
    for label in labels {
        let out = replay(&log, &grid, &df, label, &cfg, 3).unwrap();
        assert_eq!(out.log.ticks.len(), log.ticks.len());
        assert_eq!(out.log.first_detection, log.first_detection());
        match label.method() {
            None => assert!(out.log.messages.is_empty()),
            Some(m) => {
                assert_eq!(out.log.messages.len(), log.detection_count(), "{}", label.name());
                for msg in &out.log.messages {
                    assert_eq!(decode(&msg.bytes).unwrap().method, m);
                }
            }
        }
        assert_eq!(track_errors(&out.log).unwrap().len(), out.log.ticks.len());
        summaries.push(summarize_run(&out.log, &out.timings, &metrics).unwrap());
    }
    let agg = aggregate(&summaries, 0);
    assert_eq!(agg.len(), 7);
    for a in &agg {
        assert_eq!(a.runs, 1);
        assert!((0.0..=1.0).contains(&a.success_rate.mean));
    }
}

#[test]
fn replays_are_bit_identical_per_seed() {
    let grid = maps::load("sparse").unwrap();
    let df = DistanceField::new(&grid);
    let sim = short_sim();
    let planner = Planner::new(&grid, sim.robot_radius);
    let sc = generate_scenario(&planner, "sparse", 2, &sim).unwrap();
    let mut cfg = small_replay();
    cfg.snapshot_every = 25;
    cfg.snapshot_fusions = true;
    let a = run(&sc, &grid, &df, exchange(Method::Kmeans), &sim, &cfg, 9)
        .unwrap()
        .log;
    let b = run(&sc, &grid, &df, exchange(Method::Kmeans), &sim, &cfg, 9)
        .unwrap()
        .log;
    assert_eq!(a, b);
    assert_eq!(a.digest(), b.digest());
    assert!(!a.snapshots.is_empty());
    let c = run(&sc, &grid, &df, exchange(Method::Kmeans), &sim, &cfg, 10)
        .unwrap()
        .log;
    assert_ne!(a.digest(), c.digest());
}

#[test]
fn logs_survive_a_disk_round_trip() {
    let grid = maps::load("symmetric").unwrap();
    let df = DistanceField::new(&grid);
    let sim = short_sim();
    let planner = Planner::new(&grid, sim.robot_radius);
    let sc = generate_scenario(&planner, "symmetric", 4, &sim).unwrap();
    let log = record(&sc, &grid, &sim, 4).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let sensor_path = dir.path().join("run.jsonl");
    write_sensor_log(&log, &sensor_path).unwrap();
    let back = read_sensor_log(&sensor_path).unwrap();
    assert_eq!(back, log);
    assert_eq!(back.digest(), log.digest());

    let mut cfg = small_replay();
    cfg.snapshot_every = 40;
    cfg.snapshot_fusions = true;
    let out = replay(&log, &grid, &df, exchange(Method::Compresspp), &cfg, 4)
        .unwrap()
        .log;
    let run_path = dir.path().join("replay.jsonl");
    write_run_log(&out, &run_path).unwrap();
    let back = read_run_log(&run_path).unwrap();
    assert_eq!(back, out);
    assert_eq!(back.digest(), out.digest());

    let curve = convergence_curve(&[&out], &MetricConfig::default(), 0.5).unwrap();
    assert!(curve.iter().all(|(_, f)| (0.0..=1.0).contains(f)));
}

#[test]
fn corrupt_logs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    std::fs::write(&path, "{\"schema_version\": 999}\n").unwrap();
    assert!(read_sensor_log(&path).is_err());
    assert!(read_run_log(&path).is_err());
    assert!(matches!(
        read_sensor_log(&dir.path().join("missing.jsonl")),
        Err(SimError::Io { .. })
    ));
}

#[test]
fn strategy_names_parse_back() {
    for text in [
        "mcl",
        "naive",
        "std_thinning",
        "det",
        "prorok",
        "kmeans",
        "compresspp",
        "naive:0",
        "kmeans:0.2",
    ] {
        let label = StrategyLabel::parse(text, DEFAULT_ALPHA).unwrap();
        assert_eq!(StrategyLabel::parse(&label.name(), DEFAULT_ALPHA).unwrap(), label);
    }
    assert!(matches!(
        StrategyLabel::parse("gossip", DEFAULT_ALPHA),
        Err(SimError::UnknownStrategy(_))
    ));
    assert!(StrategyLabel::parse("naive:2", DEFAULT_ALPHA).is_err());
}
