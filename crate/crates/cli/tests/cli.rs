use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn jetsym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetsym")).args(args).env_remove("JETSYM_SEED").output().expect("binary runs")
}

fn run(name: &str) -> (i32, Value) {
    let path = example(name);
    let out = jetsym(&["run", path.to_str().unwrap()]);
    let code = out.status.code().unwrap();
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, report)
}

fn psi(report: &Value, coordinate: &str) -> String {
    report["result"]["fields"][0]["psi"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["coordinate"] == coordinate)
        .map(|p| p["value"].as_str().unwrap().to_string())
        .unwrap()
}

#[test]
fn lambda_prolongation_coefficients() {
    let (code, report) = run("lambda_prolong.json");
    assert_eq!(code, 0);
    assert_eq!(psi(&report, "u_x"), "u_x");
    assert_eq!(psi(&report, "u_xx"), "u_xx + u_x^2");
}

#[test]
fn exit_codes_follow_outcomes() {
    let expected = [
        ("lambda_symmetry.json", 0),
        ("lambda_not_symmetry.json", 1),
        ("mch_gauge.json", 0),
        ("mch_nonflat.json", 1),
        ("sigma_invariants.json", 0),
        ("reduce.json", 0),
        ("gauge_sigma.json", 0),
        ("noether.json", 0),
        ("saddle.json", 0),
        ("solve_ansatz.json", 0),
        ("malformed.json", 2),
    ];
    for (file, code) in expected {
        assert_eq!(run(file).0, code, "{file}");
    }
}

#[test]
fn free_particle_has_eight_point_symmetries() {
    let (code, report) = run("solve_ansatz.json");
    assert_eq!(code, 0);
    assert_eq!(report["result"]["dimension"], 8);
}

#[test]
fn failing_claim_carries_a_witness() {
    let (_, report) = run("lambda_not_symmetry.json");
    assert_eq!(report["passed"], false);
    let claim = &report["claims"][0];
    assert_eq!(claim["holds"], false);
    assert!(claim["witness"].as_object().is_some_and(|w| !w.is_empty()));
}

#[test]
fn malformed_expression_names_file_line_and_entity() {
    let path = example("malformed.json");
    let out = jetsym(&["prolong", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("malformed.json:3: broken:"), "{err}");
    assert!(err.contains("at 6"), "{err}");
}

#[test]
fn subcommand_must_match_file_operation() {
    let path = example("reduce.json");
    let out = jetsym(&["prolong", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_argument_is_an_input_error() {
    let dir = std::env::temp_dir().join(format!("jetsym-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("extra.json");
    std::fs::write(
        &path,
        r#"{ "space": { "independent": ["x"], "dependent": ["u"], "order": 1 },
  "fields": { "d_u": { "phi": ["1"] } },
  "command": { "op": "prolong", "args": { "field": "d_u", "order": 1, "bogus": 3 } } }"#,
    )
    .unwrap();
    let out = jetsym(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("bogus"));
}

#[test]
fn reports_are_deterministic_and_flags_override_the_file() {
    let path = example("sigma_invariants.json");
    let strip = |o: Output| {
        let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_object_mut().unwrap().remove("elapsed_ms");
        v
    };
    let a = strip(jetsym(&["--seed", "11", "run", path.to_str().unwrap()]));
    let b = strip(jetsym(&["run", path.to_str().unwrap(), "--seed", "11"]));
    assert_eq!(a, b);
    assert_eq!(a["oracle"]["seed"], 11);
}

#[test]
fn out_file_matches_stdout() {
    let out_path = std::env::temp_dir().join(format!("jetsym-out-{}.json", std::process::id()));
    let path = example("reduce.json");
    let out = jetsym(&["--out", out_path.to_str().unwrap(), "run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(written, String::from_utf8(out.stdout).unwrap());
    std::fs::remove_file(out_path).ok();
}

#[test]
fn reconstruct_integrates_samples() {
    let dir = std::env::temp_dir().join(format!("jetsym-rec-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("w.csv");
    // w = 3 y^2, so v = y^3 + v0 exactly on any grid
    let mut text = String::from("y,w\n");
    for i in 0..=10 {
        let y = i as f64 * 0.2;
        text.push_str(&format!("{y},{}\n", 3.0 * y * y));
    }
    std::fs::write(&path, text).unwrap();
    let out = jetsym(&["reconstruct", path.to_str().unwrap(), "--v0", "-1"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let mut rows = 0;
    for row in reader.deserialize::<(f64, f64)>() {
        let (y, v) = row.unwrap();
        assert!((v - (y.powi(3) - 1.0)).abs() < 1e-12, "v({y}) = {v}");
        rows += 1;
    }
    assert_eq!(rows, 11);

    std::fs::write(&path, "y,w\n0,1\n0,2\n").unwrap();
    assert_eq!(jetsym(&["reconstruct", path.to_str().unwrap(), "--v0", "0"]).status.code(), Some(1));
    std::fs::write(&path, "y,w\n0,oops\n").unwrap();
    assert_eq!(jetsym(&["reconstruct", path.to_str().unwrap(), "--v0", "0"]).status.code(), Some(2));
}

#[test]
fn reconstruct_exponential_example() {
    let path = example("exp_samples.csv");
    let out = jetsym(&["reconstruct", path.to_str().unwrap(), "--v0", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    for row in reader.deserialize::<(f64, f64)>() {
        let (y, v) = row.unwrap();
        assert!((v - y.exp()).abs() < 1e-6, "v({y}) = {v}");
    }
}

#[test]
fn selftest_passes_with_seed_seven() {
    let out = jetsym(&["--seed", "7", "--quiet", "--out", "/dev/null", "selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn selftest_single_check_and_unknown_name() {
    let out = jetsym(&["selftest", "--only", "pure gauge connections are flat"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["claims"].as_array().unwrap().len(), 1);
    assert_eq!(jetsym(&["selftest", "--only", "no such check"]).status.code(), Some(2));
}
