use std::path::Path;
use std::process::{Command, Output};

fn cmcl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmcl")).args(args).output().unwrap()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    std::fs::write(
        &path,
        format!(
            r#"
map = "symmetric"
scenarios = 2
repeats = 1
seed = 3
strategies = ["mcl", "compresspp", "naive:0"]
out = "{}"
write_run_logs = true

[sim]
duration = 8.0

[mcl]
n_particles = 200

[bench]
n_particles = [100, 400]
repeats = 1
"#,
            dir.join("out").display()
        ),
    )
    .unwrap();
    path.display().to_string()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn record_then_evaluate_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("out");

    let rec = cmcl(&["record", "--config", &cfg]);
    assert!(rec.status.success(), "{}", String::from_utf8_lossy(&rec.stderr));
    let manifest = csv_rows(&out.join("runs/manifest.csv"));
    assert_eq!(manifest.len(), 2);
    assert!(manifest.iter().all(|r| &r[0] == "1"));
    assert!(out.join("config.toml").exists());

    let eval = cmcl(&["evaluate", "--config", &cfg]);
    assert!(eval.status.success(), "{}", String::from_utf8_lossy(&eval.stderr));
    let eval_dir = out.join("eval");
    assert_eq!(csv_rows(&eval_dir.join("runs.csv")).len(), 2 * 3);
    assert_eq!(csv_rows(&eval_dir.join("aggregate.csv")).len(), 3);
    assert!(!csv_rows(&eval_dir.join("convergence.csv")).is_empty());
    for svg in ["success.svg", "convergence.svg"] {
        let text = std::fs::read_to_string(eval_dir.join(svg)).unwrap();
        assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    }
    assert!(std::fs::read_dir(eval_dir.join("logs")).unwrap().count() > 0);

    // evaluating again gives the same per-run metrics
    let first = std::fs::read_to_string(eval_dir.join("runs.csv")).unwrap();
    assert!(cmcl(&["evaluate", "--config", &cfg]).status.success());
    let second = std::fs::read_to_string(eval_dir.join("runs.csv")).unwrap();
    let strip = |s: &str| -> Vec<String> {
        // the trailing timing columns vary between runs
        csv::Reader::from_reader(s.as_bytes())
            .records()
            .map(|r| {
                let r = r.unwrap();
                r.iter().take(12).collect::<Vec<_>>().join(",")
            })
            .collect()
    };
    assert_eq!(strip(&first), strip(&second));
}

#[test]
fn bench_and_fixture_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("out");
    let bench = cmcl(&["bench", "--config", &cfg, "--strategies", "naive,compresspp"]);
    assert!(bench.status.success(), "{}", String::from_utf8_lossy(&bench.stderr));
    assert_eq!(csv_rows(&out.join("bench.csv")).len(), 2 * 2);

    let fix = cmcl(&[
        "fixture",
        "diamond_center",
        "--config",
        &cfg,
        "--strategies",
        "compresspp,prorok",
    ]);
    assert!(fix.status.success(), "{}", String::from_utf8_lossy(&fix.stderr));
    assert_eq!(csv_rows(&out.join("fixture/points.csv")).len(), 100);
    assert!(out.join("fixture/compresspp.csv").exists());
    assert!(out.join("fixture/prorok.svg").exists());
}

#[test]
fn map_info_reports_symmetry() {
    let out = cmcl(&["map-info", "symmetric"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).to_lowercase();
    assert!(text.contains("symmetr"), "{text}");
}

#[test]
fn exit_codes_separate_usage_from_data_errors() {
    assert_eq!(cmcl(&["--help"]).status.code(), Some(0));
    assert_eq!(cmcl(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(cmcl(&["record", "--strategies", "gossip"]).status.code(), Some(1));
    assert_eq!(
        cmcl(&["record", "--config", "/nonexistent/cfg.toml"]).status.code(),
        Some(2)
    );
    assert_eq!(cmcl(&["map-info", "/nonexistent.map"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    // nothing recorded yet
    assert_eq!(cmcl(&["evaluate", "--config", &cfg]).status.code(), Some(2));
}
