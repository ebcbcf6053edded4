use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qk_core::dynamics::{integrate, HamiltonianSystem, Method, PhasePoint};
use qk_core::expr::ScalarField;
use qk_core::structure::{BlockDim, Label};
use serde_json::{json, Value};

fn qk(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qk"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn demo() -> Value {
    json!({
        "n": 1,
        "structure": "F",
        "hamiltonian": "0.5*(x1^2+x2^2+x3^2+x4^2)",
        "initial": [1, 0, 0, 0],
        "dt": 0.01,
        "steps": 628,
        "method": "rk4",
        "output_prefix": "out/run1",
        "emit_plot": false
    })
}

fn write_config(dir: &Path, name: &str, config: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, config.to_string()).unwrap();
    path
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_owned();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn demo_run_writes_expected_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = demo();
    config["emit_plot"] = true.into();
    write_config(dir.path(), "demo.json", &config);
    let out = qk(&["run", "demo.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let (header, rows) = read_csv(&dir.path().join("out/run1.trajectory.csv"));
    assert_eq!(header, "t,x1,x2,x3,x4,energy");
    assert_eq!(rows.len(), 629);
    assert!(rows.iter().all(|r| r.len() == 6));

    let diag: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/run1.diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["passed"], true);
    assert_eq!(diag["energy_drift_series"].as_array().unwrap().len(), 629);
    assert!(
        diag.as_object().unwrap().values().all(|v| !v.is_object()),
        "document is flat"
    );

    let plot = fs::read_to_string(dir.path().join("out/run1.plot.gp")).unwrap();
    assert!(plot.contains("'run1.trajectory.csv' using 2:3"));
}

#[test]
fn csv_round_trips_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = demo();
    config["n"] = 2.into();
    config["structure"] = "H".into();
    config["hamiltonian"] = "0.5*(x1^2+x2^2+x3^2+x4^2+x5^2+x6^2+x7^2+x8^2) + x1*x6^3/7".into();
    config["initial"] = json!([0.1, -0.2, 0.3, 1.0 / 3.0, 0.5, -0.6, 0.7, 0.8]);
    config["steps"] = 200.into();
    config["method"] = "implicit_midpoint".into();
    write_config(dir.path(), "c.json", &config);
    let out = qk(&["run", "c.json"], dir.path());
    assert!(matches!(out.status.code(), Some(0) | Some(2)), "{}", stderr(&out));

    let dim = BlockDim::new(2).unwrap();
    let h = ScalarField::parse(config["hamiltonian"].as_str().unwrap(), dim).unwrap();
    let system = HamiltonianSystem::new(Label::H, h);
    let x0: Vec<f64> = config["initial"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let traj = integrate(
        &system,
        PhasePoint::new(x0, 0.0).unwrap(),
        0.01,
        200,
        Method::ImplicitMidpoint,
    )
    .unwrap();

    let (header, rows) = read_csv(&dir.path().join("out/run1.trajectory.csv"));
    assert_eq!(header, "t,x1,x2,x3,x4,x5,x6,x7,x8,energy");
    assert_eq!(rows.len(), traj.len());
    for (row, p) in rows.iter().zip(traj.points()) {
        assert_eq!(row[0].to_bits(), p.time().to_bits());
        for (a, b) in row[1..9].iter().zip(p.coordinates()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(row[9].to_bits(), system.energy(p.coordinates()).unwrap().to_bits());
    }
}

#[test]
fn single_step_gives_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = demo();
    config["steps"] = 1.into();
    write_config(dir.path(), "c.json", &config);
    let out = qk(&["run", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (_, rows) = read_csv(&dir.path().join("out/run1.trajectory.csv"));
    assert_eq!(rows.len(), 2);
}

#[test]
fn unwritable_prefix_is_operational_failure() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("blocker"), "not a directory").unwrap();
    let mut config = demo();
    config["output_prefix"] = "blocker/run1".into();
    write_config(dir.path(), "c.json", &config);
    let out = qk(&["run", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(files_in(dir.path()), ["blocker", "c.json"]);
}

#[test]
fn failed_write_leaves_only_error_log() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir_all(dir.path().join("out/run1.diagnostics.json")).unwrap();
    write_config(dir.path(), "c.json", &demo());
    let out = qk(&["run", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        files_in(&dir.path().join("out")),
        ["run1.diagnostics.json", "run1.error.log"]
    );
    assert!(stderr(&out).contains("run1.error.log"));
}

#[test]
fn config_errors_exit_one_and_name_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, Value, &str); 4] = [
        ("initial", json!([1, 0, 0]), "initial"),
        ("structure", json!("Q"), "\"F\", \"G\", \"H\""),
        ("hamiltonian", json!("x1 +* x2"), "hamiltonian"),
        ("dt", json!(0), "dt"),
    ];
    for (key, value, needle) in cases {
        let mut config = demo();
        config[key] = value;
        write_config(dir.path(), "bad.json", &config);
        let out = qk(&["run", "bad.json"], dir.path());
        assert_eq!(out.status.code(), Some(1), "{key}");
        assert!(stderr(&out).contains(needle), "{key}: {}", stderr(&out));
    }
    fs::write(dir.path().join("broken.json"), "{\"n\": ").unwrap();
    let out = qk(&["run", "broken.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not valid JSON"));
    let out = qk(&["run", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cannot read"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn coarse_step_violates_thresholds_unless_scaled() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = demo();
    config["dt"] = 0.1.into();
    config["steps"] = 100.into();
    write_config(dir.path(), "coarse.json", &config);
    let out = qk(&["run", "coarse.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let diag: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/run1.diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["energy_ok"], false);
    assert!(dir.path().join("out/run1.trajectory.csv").exists());

    let out = qk(&["run", "coarse.json", "--tolerance-scale", "1e4"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn integration_abort_keeps_partial_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = demo();
    config["hamiltonian"] = "exp(x1*x2)".into();
    config["initial"] = json!([30, 30, 0, 0]);
    config["steps"] = 10.into();
    write_config(dir.path(), "c.json", &config);
    let out = qk(&["run", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let (_, rows) = read_csv(&dir.path().join("out/run1.trajectory.csv.partial"));
    assert_eq!(rows.len(), 1);
    assert!(!dir.path().join("out/run1.trajectory.csv").exists());
}

#[test]
fn full_sweep_flag_probes_every_step() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = demo();
    config["steps"] = 20.into();
    config["method"] = "implicit_midpoint".into();
    write_config(dir.path(), "c.json", &config);
    let out = qk(&["run", "--full-sweep", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let diag: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/run1.diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["symplecticity_probe"], "all_steps");
}

#[test]
fn batch_runs_every_config() {
    let dir = tempfile::tempdir().unwrap();
    let configs = dir.path().join("configs");
    fs::create_dir(&configs).unwrap();
    for (i, label) in ["F", "G", "H"].iter().enumerate() {
        let mut config = demo();
        config["structure"] = (*label).into();
        config["output_prefix"] = format!("out/run{i}").into();
        write_config(&configs, &format!("{label}.json"), &config);
    }
    fs::write(configs.join("notes.txt"), "ignored").unwrap();
    let out = qk(&["run", "--batch", "configs"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for i in 0..3 {
        assert!(dir.path().join(format!("out/run{i}.trajectory.csv")).exists());
    }

    let mut coarse = demo();
    coarse["dt"] = 0.2.into();
    coarse["output_prefix"] = "out/coarse".into();
    write_config(&configs, "coarse.json", &coarse);
    assert_eq!(qk(&["run", "--batch", "configs"], dir.path()).status.code(), Some(2));

    fs::write(configs.join("zz_broken.json"), "[").unwrap();
    assert_eq!(qk(&["run", "--batch", "configs"], dir.path()).status.code(), Some(1));
}

#[test]
fn verify_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    for n in ["1", "2", "8"] {
        let out = qk(&["verify", "--n", n], dir.path());
        assert_eq!(out.status.code(), Some(0));
    }
    let out = qk(&["verify", "--n", "1", "--corrupt-h"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stdout);
    let tangent = text.lines().find(|l| l.starts_with("tangent")).unwrap();
    assert_eq!(
        tangent.split_whitespace().collect::<Vec<_>>(),
        ["tangent", "0", "0", "0", "2"]
    );
    assert_eq!(qk(&["verify", "--n", "0"], dir.path()).status.code(), Some(1));
}

fn dump(args: &[&str]) -> Vec<Vec<i64>> {
    let out = qk(args, Path::new("."));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn dump_prints_integer_csv() {
    let f = dump(&["dump", "--what", "structure", "--label", "F", "--n", "1"]);
    assert_eq!(
        f,
        vec![vec![0, -1, 0, 0], vec![1, 0, 0, 0], vec![0, 0, 0, -1], vec![0, 0, 1, 0]]
    );
    let fs_ = dump(&[
        "dump",
        "--what",
        "structure",
        "--label",
        "F",
        "--n",
        "1",
        "--space",
        "cotangent",
    ]);
    assert_eq!(f, fs_);
    let g = dump(&["dump", "--what", "omega", "--label", "G", "--n", "1"]);
    assert_eq!(
        g,
        vec![vec![0, 0, -1, 0], vec![0, 0, 0, 1], vec![1, 0, 0, 0], vec![0, -1, 0, 0]]
    );

    let omega = dump(&["dump", "--what", "omega", "--label", "F", "--n", "2"]);
    assert_eq!(omega.len(), 8);
    for (r, row) in omega.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            assert_eq!(omega[c][r], -v);
        }
    }

    let bad = qk(
        &["dump", "--what", "metric", "--label", "F", "--n", "1"],
        Path::new("."),
    );
    assert_eq!(bad.status.code(), Some(1));
    let bad = qk(&["dump", "--what", "omega", "--label", "Q", "--n", "1"], Path::new("."));
    assert_eq!(bad.status.code(), Some(1));
}
