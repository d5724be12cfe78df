use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn conic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conic")).args(args).output().expect("run conic")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn envelope(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("envelope on stdout")
}

#[test]
fn gate_rejection_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let unequal = write(dir.path(), "unequal.json", r#"{"genus": 0, "betas": [-0.3, -0.6], "positions": [[0,0,1],[0,0,-1]]}"#);
    let outside = write(
        dir.path(),
        "outside.json",
        r#"{"genus": 0, "betas": [-0.8, -0.1, -0.1], "positions": [[0,0,1],[1,0,0],[0,1,0]]}"#,
    );
    for spec in [unequal, outside] {
        let out = conic(&["uniformize", &spec]);
        assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(envelope(&out)["payload"]["rejected"].is_string());
    }
}

#[test]
fn unknown_config_field_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "typo.json", "{\"genus\": 0,\n \"betas\": [-0.5], \"positoins\": []}");
    let out = conic(&["classify", &spec]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("positoins") && err.contains("line 2"), "{err}");
}

#[test]
fn field_dump_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"genus": 0, "betas": ["-4/5", "-4/5", "-4/5"],
            "positions": [[1,0,0],[-0.5,0.8660254037844386,0],[-0.5,-0.8660254037844386,0]],
            "solver": {"mesh_level": 2, "grading_rings": 24}}"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = conic(&["uniformize", &spec, "--field", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("vertex_id,x,y,z,phi"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() > 100);
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 5);
        assert_eq!(cells[0].parse::<usize>().unwrap(), i);
        assert!(cells[1..].iter().all(|c| c.parse::<f64>().unwrap().is_finite()));
    }
}

#[test]
fn envelope_echoes_the_config_and_claims() {
    let out = conic(&["indicial", "--operator", "l", "--beta", "-0.5", "--window", "-3,3"]);
    assert_eq!(out.status.code(), Some(0));
    let env = envelope(&out);
    assert_eq!(env["config"]["command"]["indicial"]["beta"], -0.5);
    assert!(env["wall_time"].as_f64().unwrap() >= 0.0);
    assert_eq!(env["claims"][0]["basis"], "formula");
    assert!(env["payload"]["roots"].as_array().unwrap().len() > 2);
}

#[test]
fn run_config_file_matches_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "run.json",
        r#"{"command": {"classify": {"spec": {"genus": 1, "betas": [-0.5, -0.25]}}}, "seed": 0}"#,
    );
    let spec = write(dir.path(), "spec.json", r#"{"genus": 1, "betas": [-0.5, -0.25]}"#);
    let via_run = envelope(&conic(&["run", &config]));
    let via_cmd = envelope(&conic(&["classify", &spec]));
    assert_eq!(via_run["payload"], via_cmd["payload"]);
    assert_eq!(via_run["payload"]["tag"], "Hyperbolic");
}

#[test]
fn spectrum_csv_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("spectrum.csv");
    let json = dir.path().join("spectrum.json");
    let out = conic(&[
        "spectrum", "--geometry", "football", "--beta", "-0.5", "--K", "1", "--modes", "0..1", "--count", "2", "--grid", "128",
        "--csv", csv.to_str().unwrap(), "--output", json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    let env: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let lambda1 = env["payload"][0]["eigenvalues"][1]["value"].as_f64().unwrap();
    assert!((lambda1 - 2.0).abs() < 1e-6, "{lambda1}");
}

#[test]
fn accept_reports_each_criterion() {
    let out = conic(&["accept", "--criteria", "1,2"]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().filter(|l| l.starts_with("PASS")).count(), 2, "{stderr}");
}

#[test]
fn bad_arguments_fail() {
    assert_ne!(conic(&["spectrum", "--geometry", "torus"]).status.code(), Some(0));
    assert_eq!(conic(&["model", "--beta", "-0.5", "--r-min", "2", "--r-max", "1"]).status.code(), Some(1));
}
