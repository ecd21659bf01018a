use std::path::Path;
use std::process::{Command, Output};

use ppfxt::cli::{EXIT_PASS, EXIT_USAGE, EXIT_VIOLATION};
use ppfxt::{config, Scenario};

fn ppfxt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppfxt")).args(args).output().expect("spawn ppfxt")
}

fn code(o: &Output) -> u8 {
    o.status.code().expect("exited normally") as u8
}

fn dir_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_short_horizon_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = ppfxt(&["run", "--out", dir_arg(dir.path()), "--t-end", "2"]);
    assert_eq!(code(&o), EXIT_PASS, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("sim2") && stdout.contains("PASS"), "{stdout}");

    let csv = std::fs::read_to_string(dir.path().join("sim2.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    for col in ["t", "x1", "e1", "k_l", "k_u", "z1", "u1bar", "omega_hat"] {
        assert!(header.split(',').any(|c| c == col), "missing {col} in {header}");
    }
    assert_eq!(csv.lines().count(), 20_002);

    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("sim2.report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["metrics"]["envelope_violations"], 0);

    // The written effective config reproduces the run.
    let effective = config::load(&dir.path().join("sim2.config.json")).unwrap();
    assert_eq!(effective.sim.t_end, 2.0);
}

#[test]
fn violating_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut sc = Scenario::simulation_ii();
    sc.disturbance.amplitude = 1e6;
    sc.disturbance.bound = 1e6;
    sc.sim.t_end = 1.5;
    let path = dir.path().join("bad.json");
    config::save(&sc, &path).unwrap();
    let o = ppfxt(&["run", "--config", dir_arg(&path), "--out", dir_arg(dir.path())]);
    assert_eq!(code(&o), EXIT_VIOLATION, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("envelope violation"));
    // Partial outputs are still written.
    assert!(dir.path().join("sim2.csv").exists());
    assert!(dir.path().join("sim2.report.json").exists());
}

#[test]
fn config_errors_exit_1_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let text = config::to_json_string(&Scenario::simulation_ii()).replace("\"dt\": 0.0001,", "");
    let path = dir.path().join("missing.json");
    std::fs::write(&path, text).unwrap();
    let o = ppfxt(&["run", "--config", dir_arg(&path), "--out", dir_arg(dir.path())]);
    assert_eq!(code(&o), EXIT_USAGE);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("missing field `dt`") && err.contains("line"), "{err}");

    let o = ppfxt(&["run", "--config", "/nonexistent/x.json"]);
    assert_eq!(code(&o), EXIT_USAGE);
    let o = ppfxt(&["run", "--dt", "1"]);
    assert_eq!(code(&o), EXIT_USAGE, "dt outside [1e-5, 1e-2] must be rejected");
    let o = ppfxt(&["frobnicate"]);
    assert_eq!(code(&o), EXIT_USAGE);
}

#[test]
fn sweep_rejects_bad_exponent_lists() {
    let dir = tempfile::tempdir().unwrap();
    for list in ["", "2/3", "1,abc"] {
        let o = ppfxt(&["sweep-ubf", "--exponents", list, "--out", dir_arg(dir.path())]);
        assert_eq!(code(&o), EXIT_USAGE, "list {list:?}");
    }
}

#[test]
fn short_sweep_emits_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = ppfxt(&["sweep-ubf", "--exponents", "1/5,1/7", "--t-end", "1.5", "--out", dir_arg(dir.path())]);
    assert_eq!(code(&o), EXIT_PASS, "{}", String::from_utf8_lossy(&o.stdout));
    let table = std::fs::read_to_string(dir.path().join("ubf_sweep.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("id,baseline,m,control_energy,peak_input"));
    assert!(rows[3].contains("classical_ubf"));
}

#[test]
fn bounds_table_default_rows() {
    let o = ppfxt(&["bounds"]);
    assert_eq!(code(&o), EXIT_PASS);
    let text = String::from_utf8_lossy(&o.stdout);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let first = rdr.records().next().unwrap().unwrap();
    let t1: f64 = first[col("t1")].parse().unwrap();
    let t2: f64 = first[col("t2")].parse().unwrap();
    assert!((t1 - std::f64::consts::PI * 2f64.sqrt()).abs() < 1e-9);
    assert!((t2 - 8.0).abs() < 1e-12);
}

#[test]
fn bounds_from_params_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, r#"[{"mu1": 1, "mu2": 1, "mu3": 0.1, "p": "3/5", "q": "5/3", "tau": 0.5},
                               {"mu1": 1, "mu2": 1, "mu3": 0, "p": "3/2", "q": "5/3", "tau": 0.5}]"#).unwrap();
    let out = dir.path().join("b.csv");
    let o = ppfxt(&["bounds", "--params", dir_arg(&path), "--out", dir_arg(&out)]);
    assert_eq!(code(&o), EXIT_PASS);
    let table = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    // Invalid p leaves the numeric cells blank and names the problem.
    assert!(lines[2].contains("must lie in (0, 1)"), "{}", lines[2]);

    std::fs::write(&path, "[{\"mu1\": 1}]").unwrap();
    assert_eq!(code(&ppfxt(&["bounds", "--params", dir_arg(&path)])), EXIT_USAGE);
}

#[test]
fn selfcheck_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("selfcheck.json");
    let o = ppfxt(&["selfcheck", "--seed", "7", "--out", dir_arg(&out)]);
    assert_eq!(code(&o), EXIT_PASS, "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.as_array().unwrap().len(), 13);
}
