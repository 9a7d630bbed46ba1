use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BENCH: &str = include_str!("../configs/bench.toml");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn ovisim(args: &[&std::ffi::OsStr]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ovisim")).args(args).output().unwrap()
}

fn run(args: &[&str]) -> Output {
    let args: Vec<&std::ffi::OsStr> = args.iter().map(|a| a.as_ref()).collect();
    ovisim(&args)
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_writes_cycles_trace_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let bench = configs().join("bench.toml");
    let o = run(&["simulate", bench.to_str().unwrap(), "--trace", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cycles = std::fs::read_to_string(out.join("cycles.csv")).unwrap();
    let lines: Vec<&str> = cycles.lines().collect();
    assert_eq!(lines.len(), 4, "{cycles}");
    assert!(lines[0].starts_with("cycle,"));
    assert!(!cycles.contains('\r'));
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 3 * 4 * 200);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn identical_runs_give_identical_csvs() {
    let dir = TempDir::new().unwrap();
    let bench = configs().join("bench.toml");
    let mut bodies = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = run(&["simulate", bench.to_str().unwrap(), "--seed", "7", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        bodies.push(std::fs::read(out.join("cycles.csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn manifest_hash_tracks_config_bytes() {
    let dir = TempDir::new().unwrap();
    let hash = |text: &str, name: &str| {
        let cfg = write(&dir, &format!("{name}.toml"), text);
        let out = dir.path().join(name);
        let o = run(&["simulate", &cfg, "--cycles", "1", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let m: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        m["config_sha256"].as_str().unwrap().to_string()
    };
    let a = hash(BENCH, "a");
    let same = hash(BENCH, "same");
    let b = hash(&format!("{BENCH}# trailing comment\n"), "b");
    assert_eq!(a, same);
    assert_ne!(a, b);
}

#[test]
fn invalid_values_exit_2_with_field_path() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.toml", &BENCH.replace("mu_k = 0.28697", "mu_k = 0.9"));
    let o = run(&["simulate", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("friction.mu_k"), "{}", stderr(&o));
}

#[test]
fn malformed_config_exits_2_naming_the_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.toml", &BENCH.replace("mass_kg = 0.5", "mass = 0.5"));
    let o = run(&["simulate", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mass"), "{}", stderr(&o));

    let cfg = write(&dir, "syntax.toml", "schema_version = 1\n[tube\n");
    assert_eq!(run(&["simulate", &cfg]).status.code(), Some(2));
}

#[test]
fn missing_config_and_bad_usage_exit_2() {
    assert_eq!(run(&["simulate", "/nonexistent/config.toml"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["sweep"]).status.code(), Some(2));
}

#[test]
fn leaving_the_tube_exits_3_naming_the_phase() {
    let dir = TempDir::new().unwrap();
    let text = BENCH
        .replace("length_mm = 500.0", "length_mm = 25.0")
        .replace("cycles = 3", "cycles = 20")
        .replace("settle_cycles = 5", "settle_cycles = 0");
    let cfg = write(&dir, "short.toml", &text);
    let o = run(&["simulate", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("advance-group-") || err.contains("retract-all"), "{err}");
}

#[test]
fn sweep_over_the_shipped_grid_has_36_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let bench = configs().join("bench.toml");
    let grid = configs().join("grid.toml");
    let o = run(&[
        "sweep",
        bench.to_str().unwrap(),
        "--grid",
        grid.to_str().unwrap(),
        "--seeds",
        "1,2,3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 37);
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(summary.as_bytes());
    let header = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let r: f64 = row[header.iter().position(|h| h == "pearson_r").unwrap()].parse().unwrap();
    assert!(r > 0.3, "{summary}");
}

#[test]
fn single_point_sweep_reports_undefined_correlation() {
    let dir = TempDir::new().unwrap();
    let grid = write(
        &dir,
        "one.toml",
        "[[point]]\nactuation_mm = 3.0\ntube = { length_mm = 500.0, shape = { kind = \"straight\", diameter_mm = 22.25 } }\n",
    );
    let out = dir.path().join("out");
    let bench = configs().join("bench.toml");
    let o = run(&["sweep", bench.to_str().unwrap(), "--grid", &grid, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(summary.as_bytes());
    let header = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let col = |name: &str| row[header.iter().position(|h| h == name).unwrap()].to_string();
    assert_eq!(col("pearson_r"), "");
    assert_eq!(col("reason"), "zero variance");
}

#[test]
fn capacity_reports_rated_payload() {
    let cfg = configs().join("vertical.toml");
    let o = run(&["capacity", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("payload capacity: 5.78 kg"), "{}", stdout(&o));
}

#[test]
fn gait_prints_the_canonical_table() {
    let o = run(&["gait"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5, "{text}");
    assert_eq!(lines[4], "4,retract-all,-10,-10,-10");
    let two = run(&["gait", "--groups", "2", "--stroke", "5"]);
    assert!(stdout(&two).contains("3,retract-all,-5,-5"));
    assert_eq!(run(&["gait", "--groups", "1"]).status.code(), Some(2));
}

#[test]
fn infeasible_calibration_bounds_exit_2() {
    let dir = TempDir::new().unwrap();
    let text = format!(
        "{BENCH}\n[calibration]\nbudget = 50\n[calibration.bounds]\nmu_s = [0.3, 0.3]\nmu_k = [0.4, 0.5]\nk_t = [0.1, 1.0]\nheterogeneity_sigma = [0.0, 0.0]\n"
    );
    let cfg = write(&dir, "infeasible.toml", &text);
    let o = run(&["calibrate", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("mu_k"), "{}", stderr(&o));
}

#[test]
fn calibrate_writes_fit_and_residuals() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let bench = configs().join("bench.toml");
    let o = run(&["calibrate", bench.to_str().unwrap(), "--budget", "40", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let residuals = std::fs::read_to_string(out.join("residuals.csv")).unwrap();
    assert_eq!(residuals.lines().count(), 3, "{residuals}");
    let fitted = std::fs::read_to_string(out.join("fitted_friction.toml")).unwrap();
    let table: toml::Table = toml::from_str(&fitted).unwrap();
    let f: ovisim::FrictionParams = table["friction"].clone().try_into().unwrap();
    assert!(f.mu_k <= f.mu_s);
}
