use std::io::Write;
use std::process::{Command as Proc, Stdio};

use maslov_cli::{run, Command, OutputFormat, EXIT_BAD_INPUT, EXIT_FAILED_CHECK, EXIT_OK};
use serde_json::Value;

fn json_run(cmd: Command, cfg: &str) -> (Value, i32) {
    let out = run(cmd, Some(cfg), OutputFormat::Json);
    assert!(out.error.is_none() || out.exit_code != EXIT_OK, "{out:?}");
    let v = if out.output.is_empty() {
        Value::Null
    } else {
        serde_json::from_str(&out.output).unwrap()
    };
    (v, out.exit_code)
}

#[test]
fn index_on_sphere_agrees() {
    let (v, code) = json_run(Command::Index, r#"{"preset": "sphere-n1"}"#);
    assert_eq!(code, EXIT_OK);
    let r = &v["result"];
    assert_eq!(r["conjugate_total"], 3);
    assert_eq!(r["spectral_total"], 3);
    assert_eq!(r["hessian_index"], 3);
    assert_eq!(r["certified"], true);
    assert_eq!(v["status"], "ok");
}

#[test]
fn preset_catalog_expectations_hold() {
    for p in maslov_cli::presets::catalog() {
        let Some(exp) = p.expected else { continue };
        let (v, code) = json_run(Command::Index, &format!(r#"{{"preset": "{}"}}"#, p.name));
        assert_eq!(code, EXIT_OK, "{}", p.name);
        let r = &v["result"];
        assert_eq!(r["conjugate_total"], exp.conjugate_total, "{}", p.name);
        assert_eq!(r["spectral_total"], exp.spectral_total, "{}", p.name);
        assert_eq!(r["hessian_index"], exp.hessian_index, "{}", p.name);
    }
}

#[test]
fn maslov_loop_of_diag_1_2() {
    let (v, code) = json_run(Command::MaslovLoop, r#"{"subcommand-params": {"s": [[1, 0], [0, 2]]}}"#);
    assert_eq!(code, EXIT_OK);
    let r = &v["result"];
    assert_eq!(r["maslov"], 2);
    assert_eq!(r["intersection"], -2);
    assert!((r["winding"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn maslov_loop_default_matrix_from_n() {
    let (v, _) = json_run(Command::MaslovLoop, r#"{"n": 3}"#);
    assert_eq!(v["result"]["maslov"], 3);
}

#[test]
fn output_is_deterministic() {
    let cfg = r#"{"preset": "random-trig", "settings": {"seed": 11}}"#;
    let a = run(Command::Index, Some(cfg), OutputFormat::Json);
    let b = run(Command::Index, Some(cfg), OutputFormat::Json);
    assert_eq!(a.output, b.output);
    let c = run(Command::Conjugate, Some(cfg), OutputFormat::Csv);
    let d = run(Command::Conjugate, Some(cfg), OutputFormat::Csv);
    assert_eq!(c.output, d.output);
}

#[test]
fn csv_tables() {
    let out = run(Command::Conjugate, Some(r#"{"preset": "two-scale"}"#), OutputFormat::Csv);
    let lines: Vec<&str> = out.output.lines().collect();
    assert_eq!(lines[0], "u_star,multiplicity,sign,slope");
    // one row per kernel direction: 1 at π/2, 2 at π
    assert_eq!(lines.len(), 4);
    let out = run(Command::Hessian, Some(r#"{"preset": "deep-well", "subcommand-params": {"meshes": [64, 128]}}"#), OutputFormat::Csv);
    assert_eq!(out.output, "mesh,index\n64,2\n128,2\n");
}

#[test]
fn bad_inputs_exit_2() {
    for cfg in [
        r#"{"preset": "flat", "settings": {"steps": -1}}"#,
        r#"{"preset": "flat", "extra": true}"#,
        r#"{"preset": "unheard-of"}"#,
        r#"{"n": 1, "interval": [0, 1]}"#,
        r#"{"preset": "flat", "interval": [1, 0]}"#,
        "{not json",
    ] {
        let out = run(Command::Index, Some(cfg), OutputFormat::Json);
        assert_eq!(out.exit_code, EXIT_BAD_INPUT, "{cfg}: {out:?}");
        assert!(out.output.is_empty());
    }
    let out = run(Command::Rectangle, Some(r#"{"preset": "sphere-n1", "subcommand-params": {"lambda0": 2}}"#), OutputFormat::Json);
    assert_eq!(out.exit_code, EXIT_BAD_INPUT);
}

#[test]
fn rectangle_residual_zero() {
    let (v, code) = json_run(Command::Rectangle, r#"{"preset": "conjugate-endpoint"}"#);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["residual"], 0);
    assert_ne!(code, EXIT_FAILED_CHECK);
}

#[test]
fn binary_reads_stdin_and_writes_file() {
    let dir = std::env::temp_dir().join(format!("maslov-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("hessian.json");
    let mut child = Proc::new(env!("CARGO_BIN_EXE_maslov"))
        .args(["hessian", "--config", "-", "--out"])
        .arg(&out_path)
        .stdin(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"{"preset": "two-scale", "settings": {"mesh": 64}}"#)
        .unwrap();
    let status = child.wait().unwrap();
    assert_eq!(status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["result"]["counts"][0]["index"], 3);

    let status = Proc::new(env!("CARGO_BIN_EXE_maslov"))
        .args(["index", "--config"])
        .arg(dir.join("missing.json"))
        .stderr(Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_BAD_INPUT));
    std::fs::remove_dir_all(&dir).ok();
}
