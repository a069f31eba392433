use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gray-holonomy"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn report(dir: &Path, args: &[&str]) -> (Output, Value) {
    let out = dir.join("report.json");
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--out", out.to_str().unwrap()]);
    let o = run(&all);
    let v = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    (o, v)
}

fn validator() -> jsonschema::Validator {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/schema/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn check_axioms_on_adjoint_gl2_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (o, v) = report(dir.path(), &["check-axioms", "--instance", "adjoint", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(v["schema"], "gray-holonomy/1");
    assert_eq!(v["pass"], true);
    let entries = v["checks"][0]["details"]["entries"].as_array().unwrap();
    assert!(entries.len() > 20);
    for e in entries {
        assert!(e["max_residual"].as_f64().unwrap() <= 1e-9, "{e}");
    }
}

#[test]
fn path_convergence_prints_a_table_with_order_near_four() {
    let dir = tempfile::tempdir().unwrap();
    let (o, v) = report(
        dir.path(),
        &["convergence", "--op", "path", "--family", "const-exp"],
    );
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("error"));
    assert!(stdout.lines().any(|l| l.trim_start().starts_with("256")));
    let order = v["checks"][0]["residual"].as_f64().unwrap();
    assert!(order >= 3.5, "{order}");
}

#[test]
fn unknown_check_exits_2_and_lists_valid_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"checks": ["axioms", "holonomy-ish"]}"#);
    let o = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("holonomy-ish"));
    for name in ["axioms", "gray", "stokes", "baez_schreiber", "convergence"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"checks": ["axioms"], "colour": 1}"#,
        r#"{"instance": {"instance": "adjoint", "group": {"type": "SL", "n": 2}}, "checks": ["axioms"]}"#,
        r#"{"instance": {"instance": "adjoint", "group": {"type": "GL", "n": 2}}, "triple": {"recipe": "R2"}, "checks": ["green"]}"#,
        r#"{"instance": {"instance": "chain", "dims": [1, 1, 1], "boundaries": [[[1.0]], [[1.0]]]}, "checks": ["axioms"]}"#,
        "not json",
    ];
    for (k, text) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("c{k}.json"), text);
        let o = run(&["run", "--config", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "case {k}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(run(&["green", "--resolution", "8,8"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_1_and_names_the_identity() {
    let o = run(&["check-axioms", "--tol", "1e-30", "--samples", "20"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("FAIL axioms: identity"), "{err}");
    assert!(err.contains("at sample"), "{err}");
}

#[test]
fn reports_are_bit_identical_and_schema_valid() {
    // coarse grid: this test is about reproducibility, not accuracy
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
            "instance": {"instance": "chain", "dims": [2, 3, 2], "seed": 3},
            "triple": {"recipe": "R2", "d": 3, "seed": 4},
            "resolution": {"N_t": 16},
            "checks": ["axioms", "gray", "differential", "holonomy", "green", "stokes",
                       "interchange", "invariance", "baez_schreiber"],
            "seed": 7,
            "factors": [3.0],
            "tol": {"green": 1e-3, "stokes": 1e-3, "interchange": 1e-3, "invariance": 1e-3}
        }"#,
    );
    let run_once = |name: &str| {
        let out = dir.path().join(name);
        let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
        std::fs::read(out).unwrap()
    };
    let a = run_once("a.json");
    let b = run_once("b.json");
    assert_eq!(a, b);

    let v: Value = serde_json::from_slice(&a).unwrap();
    let names: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names[0], "axioms");
    assert_eq!(names[8], "baez_schreiber");
    assert_eq!(v["seed"], 7);
    let scan = v["checks"][6]["details"]["factor_scan"].as_array().unwrap();
    assert_eq!(scan.len(), 2);

    let val = validator();
    assert!(val.is_valid(&v), "{:?}", val.iter_errors(&v).map(|e| e.to_string()).collect::<Vec<_>>());
}

#[test]
fn every_subcommand_report_is_schema_valid() {
    let dir = tempfile::tempdir().unwrap();
    let val = validator();
    let commands: [&[&str]; 8] = [
        &["check-gray", "--samples", "10"],
        &["check-differential", "--automorphism"],
        &["holonomy", "--resolution", "16"],
        &["stokes", "--instance", "chain", "--resolution", "8"],
        &["wilson", "--resolution", "8"],
        &["invariance", "--kind", "rank1"],
        &["convergence", "--op", "green", "--ns", "8,16"],
        &["baez-schreiber", "--fd-step", "2e-3"],
    ];
    for args in commands {
        let (o, v) = report(dir.path(), args);
        assert!(o.status.code() == Some(0) || o.status.code() == Some(1), "{args:?}");
        assert!(val.is_valid(&v), "{args:?}");
        assert_eq!(v["command"], args[0]);
    }
}

#[test]
fn resolution_flag_reaches_the_integrator() {
    let dir = tempfile::tempdir().unwrap();
    let (_, v) = report(dir.path(), &["green", "--resolution", "12,10,8"]);
    let r = &v["checks"][0]["details"]["resolution"];
    assert_eq!((r["N_t"].as_u64(), r["N_s"].as_u64(), r["N_x"].as_u64()), (Some(12), Some(10), Some(8)));
}

#[test]
fn user_forms_load_from_config() {
    // constant omega = A dx_1 on R^2, m and theta zero: the path holonomy
    // along the x_1 axis is exp(A)
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{
            "instance": {"instance": "adjoint", "group": {"type": "GL", "n": 2}},
            "triple": {"recipe": "user",
                "omega": {"d": 2, "k": 1, "terms": [{"I": [0], "monomials": [
                    {"alpha": [0, 0], "matrix": [[0.0, 0.5], [-0.5, 0.0]]}]}]},
                "m": {"d": 2, "k": 2, "terms": []},
                "theta": {"d": 2, "k": 3, "terms": []}},
            "cube": {"builder": "straight_path", "from": [0.0, 0.0], "to": [1.0, 0.0]},
            "resolution": {"N_t": 256},
            "checks": ["holonomy"]
        }"#,
    );
    let out = dir.path().join("r.json");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let w = &v["checks"][0]["details"]["result"]["value"];
    let (c, s) = (0.5f64.cos(), 0.5f64.sin());
    let want = [[c, s], [-s, c]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((w[i][j].as_f64().unwrap() - want[i][j]).abs() < 1e-9, "{w}");
        }
    }
}
