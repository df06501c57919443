use std::process::{Command, Output};

use serde_json::Value;

fn sixcyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sixcyl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = sixcyl(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn code(args: &[&str]) -> i32 {
    sixcyl(args).status.code().expect("exit code")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key]
        .as_f64()
        .unwrap_or_else(|| panic!("{key} missing in {v}"))
}

#[test]
fn eval_record_point() {
    let v = ok_json(&["eval", "--x", "0.5"]);
    assert!((num(&v, "min_distance") - (12.0f64 / 11.0).sqrt()).abs() < 1e-12);
    assert!((num(&v, "radius") - (3.0 + 33f64.sqrt()) / 8.0).abs() < 1e-12);
    assert_eq!(v["d3_symmetric"], Value::Bool(true));
    assert_eq!(v["configuration"]["lines"].as_array().unwrap().len(), 6);
}

#[test]
fn eval_initial_and_return_points() {
    let v = ok_json(&["eval", "--phi", "0", "--delta", "0", "--kappa", "0"]);
    assert!((num(&v, "min_distance") - 1.0).abs() < 1e-12);
    assert!((num(&v, "radius") - 1.0).abs() < 1e-12);
    let v = ok_json(&["eval", "--x", "0.25"]);
    assert!((num(&v, "min_distance") - 1.0).abs() < 1e-12);
}

#[test]
fn eval_degrees_match_radians() {
    let rad = ok_json(&["eval", "--phi", "0.3", "--delta", "-0.2", "--kappa", "0.1"]);
    let deg = ok_json(&[
        "eval",
        "--degrees",
        "--phi",
        &0.3f64.to_degrees().to_string(),
        "--delta",
        &(-0.2f64).to_degrees().to_string(),
        "--kappa",
        &0.1f64.to_degrees().to_string(),
    ]);
    assert!((num(&rad, "dab_sq") - num(&deg, "dab_sq")).abs() < 1e-12);
    assert!((num(&deg, "phi") - 0.3f64.to_degrees()).abs() < 1e-9);
    assert_eq!(deg["angle_unit"], "degrees");
}

#[test]
fn eval_curve_latitude() {
    let v = ok_json(&[
        "eval",
        "--curve-phi",
        &(3.0f64 / 11.0).sqrt().asin().to_string(),
    ]);
    assert!((num(&v["curve"], "x") - 0.5).abs() < 1e-9);
}

#[test]
fn eval_rejects_conflicts() {
    assert_eq!(code(&["eval", "--x", "0.5", "--phi", "0"]), 1);
    assert_eq!(code(&["eval", "--phi", "0"]), 1);
    assert_eq!(code(&["eval"]), 1);
    assert_eq!(code(&["eval", "--x", "1.5"]), 1);
    assert_eq!(
        code(&[
            "eval",
            "--phi",
            "1.5707963267948966",
            "--delta",
            "0",
            "--kappa",
            "0"
        ]),
        1
    );
    assert_eq!(code(&["no-such-command"]), 1);
}

#[test]
fn curve_csv_shape() {
    let out = sixcyl(&["curve", "--samples", "8"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.ends_with('\n'));
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "x,phi,delta,kappa,S,T,U,F,dae_sq");
    assert_eq!(rows.len(), 9);
    let record: Vec<f64> = rows[4].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(record[0], 0.5);
    assert!((record[7] - 12.0 / 11.0).abs() < 1e-11);
    assert!((record[8] - 540.0 / 143.0).abs() < 1e-10);
    let last: Vec<&str> = rows[8].split(',').collect();
    assert_eq!(last[7], "1.00000000000");
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        vec!["curve", "--samples", "5"],
        vec!["record"],
        vec![
            "optimize", "--starts", "2", "--budget", "2000", "--seed", "7",
        ],
        vec!["probe", "--trials", "200", "--seed", "3"],
    ] {
        assert_eq!(sixcyl(&args).stdout, sixcyl(&args).stdout, "{args:?}");
    }
}

#[test]
fn record_report_values() {
    let v = ok_json(&["record"]);
    let r = &v["record"];
    assert!((num(&r["r_m"], "computed") - 1.093070331).abs() < 1e-9);
    assert_eq!(r["dae_sq_m"]["expression"], "540/143");
}

#[test]
fn optimize_from_file_keeps_record() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("record.json");
    let rec = ok_json(&["record"]);
    std::fs::write(&path, rec["configuration"].to_string()).unwrap();
    let from = format!("file:{}", path.display());
    let v = ok_json(&[
        "optimize", "--starts", "1", "--budget", "1000", "--from", &from,
    ]);
    assert!((num(&v, "d_best") - (12.0f64 / 11.0).sqrt()).abs() < 1e-6);
    assert!(num(&v, "evals") <= 1000.0);
    assert_eq!(v["best"]["coords"].as_array().unwrap().len(), 18);
}

#[test]
fn optimize_validation() {
    assert_eq!(code(&["optimize", "--budget", "0"]), 1);
    assert_eq!(code(&["optimize", "--starts", "0"]), 1);
    assert_eq!(code(&["optimize", "--from", "nowhere"]), 1);
    assert_eq!(code(&["optimize", "--from", "file:/no/such/file.json"]), 2);
}

#[test]
fn probe_at_record() {
    let v = ok_json(&[
        "probe", "--radius", "1e-3", "--trials", "2000", "--seed", "1",
    ]);
    assert!(num(&v, "max_found") <= (12.0f64 / 11.0).sqrt() + 1e-6);
    assert_eq!(num(&v, "exceed_fraction"), 0.0);
    assert_eq!(code(&["probe", "--radius", "0"]), 1);
}

#[test]
fn unlock_verdicts() {
    assert_eq!(
        ok_json(&["unlock-check", "--alpha", "1.0471975511965976"])["verdict"],
        "unlockable"
    );
    assert_eq!(
        ok_json(&["unlock-check", "--alpha", "90", "--degrees"])["verdict"],
        "marginal"
    );
    assert_eq!(
        ok_json(&["unlock-check", "--alpha", "2.0"])["verdict"],
        "blocked"
    );
    assert_eq!(code(&["unlock-check", "--alpha", "4"]), 1);
}

#[test]
fn four_cylinder_csv() {
    let out = sixcyl(&["four-cyl", "--t-max", "3", "--samples", "7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 8);
    for row in &rows[1..] {
        let v: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        for d in &v[6..9] {
            assert!((d - 2.0).abs() < 1e-10);
        }
    }
    assert_eq!(code(&["four-cyl", "--samples", "1"]), 1);
}

#[test]
fn scene_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("record.obj");
    let v = ok_json(&[
        "export-scene",
        "--at",
        "record",
        "--segments",
        "16",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(num(&v["gaps"], "min_gap") >= -1e-6);
    let obj = std::fs::read_to_string(&path).unwrap();
    assert!(obj.ends_with('\n'));
    assert!(obj.lines().any(|l| l.starts_with("v ")));
    assert!(obj.lines().any(|l| l.starts_with("f ")));

    let path = dir.path().join("c6.obj");
    let v = ok_json(&[
        "export-scene",
        "--at",
        "c6",
        "--radius",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    let touching = v["gaps"]["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|p| p["gap"].as_f64().unwrap().abs() < 1e-9)
        .count();
    assert!(touching >= 6);

    let bad = dir.path().join("bad.obj");
    assert_eq!(
        code(&[
            "export-scene",
            "--segments",
            "4",
            "--out",
            bad.to_str().unwrap()
        ]),
        1
    );
    assert_eq!(code(&["export-scene", "--out", "/no/such/dir/x.obj"]), 2);
}

#[test]
fn report_all_passes_and_detects_fault() {
    let out = sixcyl(&["report-all"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 13);
    assert!(text.contains("1.093070331"));

    let v = ok_json(&["report-all", "--json"]);
    assert_eq!(v["all_passed"], Value::Bool(true));
    assert_eq!(v["criteria"].as_array().unwrap().len(), 13);

    let out = sixcyl(&["report-all", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL [ 1]"));
}
