//! End-to-end runs of the `coded-caching` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use coded_caching::dump::{read_caches, read_metis};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_coded-caching"));
    cmd.env_remove("CODED_CACHING_MAX_VERTICES");
    cmd
}

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("run.toml");
    fs::write(&path, config).unwrap();
    bin()
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join("out").join(name)).unwrap()
}

const FIG1: &str = r#"
[system]
users = 3
files = 3
cache_size = 1.0
[popularity]
probs = [0.7, 0.21, 0.09]
[policy]
kind = "rap"
[sweep]
axis = "n"
values = [3, 5, 10, 15]
[output]
name = "fig1"
"#;

#[test]
fn analyze_fig1_recipe() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), FIG1, &["analyze"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(dir.path(), "fig1.analyze.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "axis,value,policy,m_tilde,rub,psi,mbar,lfu_rate,uniform_rub"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("n,3,rap,"), "{}", lines[1]);
    let json: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "fig1.analyze.json")).unwrap();
    let points = json["points"].as_array().unwrap();
    assert_eq!(points.len(), 4);
    let p3 = points[0]["caching_dist"].as_array().unwrap();
    assert!(p3[0].as_f64().unwrap() >= 0.8);
    assert!((points[0]["rub"].as_f64().unwrap() - 0.9).abs() < 1e-9);
}

#[test]
fn analyze_fig4d_ratio_column() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"
[system]
users = 5000
files = 500
cache_size = 20
[popularity]
alpha = 1.6
[policy]
kind = "auto"
[sweep]
axis = "M"
values = [10, 20]
"#;
    let out = run(dir.path(), config, &["analyze"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = read(dir.path(), "run.analyze.csv");
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[1][2], "random_lfu(auto)");
    let ratio = rows[1][7].parse::<f64>().unwrap() / rows[1][4].parse::<f64>().unwrap();
    assert!((4.0..=16.0).contains(&ratio), "{ratio}");
}

const SIM: &str = r#"
[system]
users = 6
files = 8
cache_size = 2
packets = 10
seed = 5
[popularity]
alpha = 0.8
[policy]
kind = "random_lfu"
[simulation]
trials = 40
[sweep]
axis = "M"
values = [0, 2, 8]
[output]
name = "sim"
dump_first_trial = true
"#;

#[test]
fn simulate_is_reproducible_and_verified() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(dir.path(), SIM, &["simulate", "--threads", "2"]);
    assert!(
        first.status.success(),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let csv1 = read(dir.path(), "sim.simulate.csv");
    let json1 = read(dir.path(), "sim.simulate.json");
    let second = run(dir.path(), SIM, &["simulate", "--threads", "1"]);
    assert!(second.status.success());
    assert_eq!(csv1, read(dir.path(), "sim.simulate.csv"));
    assert_eq!(json1, read(dir.path(), "sim.simulate.json"));

    let mut reader = csv::Reader::from_reader(csv1.as_bytes());
    let header = reader.headers().unwrap().clone();
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        [
            "axis",
            "value",
            "policy",
            "m_tilde",
            "rub",
            "psi",
            "mbar",
            "lfu_rate",
            "uniform_rub",
            "mean_rate",
            "ci95",
            "decode_pass_rate",
            "trials",
            "B"
        ]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    for row in &rows {
        assert_eq!(&row[11], "1");
        assert_eq!(&row[12], "40");
        assert_eq!(&row[13], "10");
    }
    let json: serde_json::Value = serde_json::from_str(&json1).unwrap();
    let empty = &json["points"][0];
    let sim = &empty["simulation"];
    let gap = (sim["mean_rate"].as_f64().unwrap() - empty["mbar"].as_f64().unwrap()).abs();
    assert!(
        gap <= 3.0 * sim["ci95"].as_f64().unwrap(),
        "M = 0 row off by {gap}"
    );
    assert_eq!(&rows[2][9], "0");

    let graph = read_metis(&read(dir.path(), "sim.trial1.graph")).unwrap();
    let caches = read_caches(&read(dir.path(), "sim.trial1.caches")).unwrap();
    assert_eq!(caches.params().cache_size, 0.0);
    assert!(coded_caching_core::delivery::Graph::order(&graph) > 0);
}

#[test]
fn seed_override_changes_results() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), SIM, &["simulate"]);
    let base = read(dir.path(), "sim.simulate.json");
    let out = run(dir.path(), SIM, &["simulate", "--seed", "6"]);
    assert!(out.status.success());
    assert_ne!(base, read(dir.path(), "sim.simulate.json"));
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let config = SIM.replace("values = [0, 2, 8]", "values = []");
    let out = run(dir.path(), &config, &["simulate"]);
    assert!(out.status.success());
    assert_eq!(read(dir.path(), "sim.simulate.csv").lines().count(), 1);
    let out = run(dir.path(), &config, &["analyze"]);
    assert!(out.status.success());
    assert_eq!(
        read(dir.path(), "sim.analyze.csv"),
        "axis,value,policy,m_tilde,rub,psi,mbar,lfu_rate,uniform_rub\n"
    );
}

#[test]
fn config_errors_exit_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        SIM.replace("trials = 40", "trials = 40\ntrails = 4"),
        SIM.replace("alpha = 0.8", "alpha = -2"),
        SIM.replace("values = [0, 2, 8]", "values = [0, 9]"),
        "not toml".to_string(),
    ] {
        let out = run(dir.path(), &bad, &["simulate"]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!dir.path().join("out").join("sim.simulate.csv").exists());
    }
    let missing = bin()
        .args(["analyze", "--config", "/nonexistent.toml"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn resource_guard_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, SIM).unwrap();
    let out = bin()
        .env("CODED_CACHING_MAX_VERTICES", "50")
        .args(["simulate", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("n = 6") && stderr.contains("B = 10"),
        "{stderr}"
    );
    assert!(!dir.path().join("out").join("sim.simulate.csv").exists());
}

#[test]
fn verify_passes_and_detects_injected_fault() {
    let ok = bin().args(["verify", "--seeds", "100"]).output().unwrap();
    assert!(
        ok.status.success(),
        "{}",
        String::from_utf8_lossy(&ok.stdout)
    );
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 5);

    let bad = bin()
        .args(["verify", "--seeds", "10", "--inject-fault", "edge-flip"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&bad.stdout);
    assert!(stdout.contains("FAIL edge-rule"), "{stdout}");
    assert!(
        stdout.contains("seed ") && stdout.contains("(user "),
        "{stdout}"
    );
}
