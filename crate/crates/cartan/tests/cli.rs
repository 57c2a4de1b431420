use std::path::PathBuf;
use std::process::{Command, Output};

fn cartan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cartan"))
        .args(args)
        .env_remove("CARTAN_SEED")
        .env_remove("CARTAN_CONFIG")
        .env_remove("CARTAN_FORMAT")
        .env_remove("CARTAN_MODEL")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn schema() -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas/report.schema.json");
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("cartan-cli-{}-{name}", std::process::id()))
}

#[test]
fn verify_exit_codes() {
    let ok = cartan(&["verify", "--points", "10", "--triples", "2"]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert_eq!(json(&ok)["pass"], true);

    let broken = cartan(&[
        "verify",
        "--points",
        "10",
        "--triples",
        "2",
        "--curvature-scale",
        "1.1",
    ]);
    assert_eq!(broken.status.code(), Some(1));
    let r = json(&broken);
    assert_eq!(r["pass"], false);
    assert!(r["report"]["jacobi_max_residual"].as_f64().unwrap() > 1e-3);
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(
        cartan(&["verify", "--model", "no_such_model"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(cartan(&["leaf", "--point", "1,2"]).status.code(), Some(2));
    assert_eq!(cartan(&["frobnicate"]).status.code(), Some(2));

    let cfg = tmp("bad.json");
    std::fs::write(&cfg, r#"{"seed": 1, "colour": "blue"}"#).unwrap();
    let out = cartan(&["--config", cfg.to_str().unwrap(), "ek", "table1"]);
    std::fs::remove_file(&cfg).ok();
    assert_eq!(out.status.code(), Some(2));

    let out = cartan(&["--identity-tol", "-1", "verify"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let args = ["--seed", "11", "verify", "--points", "12", "--triples", "3"];
    let a = cartan(&args);
    let b = cartan(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = cartan(&["--seed", "12", "verify", "--points", "12", "--triples", "3"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn config_then_flags_then_env() {
    let cfg = tmp("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"seed": 5, "tolerances": {"denominator_bound": 500}}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();

    let r = json(&cartan(&["--config", c, "ek", "table1"]));
    assert_eq!(r["provenance"]["seed"], 5);
    assert_eq!(r["provenance"]["tolerances"]["denominator_bound"], 500);
    assert_eq!(r["provenance"]["tolerances"]["identity"], 1e-8);

    let r = json(&cartan(&["--config", c, "--seed", "6", "ek", "table1"]));
    assert_eq!(r["provenance"]["seed"], 6);

    let out = Command::new(env!("CARGO_BIN_EXE_cartan"))
        .args(["--config", c, "ek", "table1"])
        .env("CARTAN_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(json(&out)["provenance"]["seed"], 9);
    std::fs::remove_file(&cfg).ok();
}

#[test]
fn out_flag_writes_file() {
    let path = tmp("out.json");
    let out = cartan(&[
        "--out",
        path.to_str().unwrap(),
        "ek",
        "su21",
        "--a",
        "0.2",
        "--b",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(r["command"], "ek su21");
}

#[test]
fn table_text_matches_golden() {
    let out = cartan(&["ek", "table1", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let golden = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/table1.txt"),
    )
    .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
}

#[test]
fn every_report_matches_schema() {
    let v = schema();
    let runs: &[&[&str]] = &[
        &["verify", "--points", "8", "--triples", "2"],
        &[
            "verify",
            "--model",
            "constant_curvature",
            "--n",
            "3",
            "--points",
            "8",
            "--triples",
            "2",
        ],
        &[
            "leaf",
            "--point",
            "1,0.6,0,-0.75",
            "--flows",
            "2",
            "--flow-time",
            "1",
        ],
        &["monodromy", "--c1", "1", "--c2", "0"],
        &["complete", "--c1", "0.25", "--c2", "-0.1666666666666666"],
        &["ek", "classify", "--c1", "-1", "--c2", "0.3"],
        &["ek", "table1"],
        &[
            "ek", "su21", "--a", "0.7", "--b", "0.2", "--u1", "0.1", "--u2", "-0.3",
        ],
        &["ek", "sweep", "--grid", "6"],
    ];
    for args in runs {
        let out = cartan(args);
        assert!(
            matches!(out.status.code(), Some(0 | 1)),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let r = json(&out);
        let errors: Vec<String> = v
            .iter_errors(&r)
            .map(|e| format!("{e} at {}", e.instance_path()))
            .collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
}

#[test]
fn schema_rejects_malformed_reports() {
    let v = schema();
    let out = cartan(&["ek", "table1"]);
    let mut r = json(&out);
    r.as_object_mut().unwrap().remove("provenance");
    assert!(!v.is_valid(&r));
    let mut r = json(&out);
    r["pass"] = serde_json::json!("yes");
    assert!(!v.is_valid(&r));
}
