use std::path::Path;
use std::process::{Command, Output};

fn bnd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bnd"))
        .args(args)
        .output()
        .expect("run bnd")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn formula_curve_and_surface() {
    let o = bnd(&["formula", "--dim", "1", "--ambient", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "2*h + 5*p1");

    let o = bnd(&["formula", "--dim", "2", "--ambient", "5"]);
    assert_eq!(stdout(&o).trim(), "3*h^2 + 6*h*p1 + 12*p1^2 + p2");
}

#[test]
fn formula_rejects_bad_dims() {
    assert_eq!(
        bnd(&["formula", "--dim", "1", "--ambient", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bnd(&["formula", "--dim", "0", "--ambient", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(bnd(&["formula", "--dim", "1"]).status.code(), Some(2));
}

#[test]
fn formula_stability_json() {
    let o = bnd(&[
        "--json",
        "formula",
        "--dim",
        "1",
        "--ambient",
        "3",
        "--stability",
        "6",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["formula"], "2*h + 5*p1");
    assert_eq!(v["stability"]["formulas"].as_array().unwrap().len(), 5);
    assert_eq!(v["stability"]["stable"], false);
}

#[test]
fn bnd_values() {
    let o = bnd(&["bnd", "--ambient", "2", "--degrees", "4", "--affine"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "192");
    assert!(String::from_utf8_lossy(&o.stderr).contains("general position"));

    let o = bnd(&["bnd", "--ambient", "3", "--degrees", "2", "--affine"]);
    assert_eq!(stdout(&o).trim(), "6");

    let o = bnd(&[
        "--json",
        "bnd",
        "--ambient",
        "3",
        "--degrees",
        "2,3",
        "--affine",
        "--general",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["bnd"], 480);
    assert!(v["closure"].is_i64());
}

#[test]
fn bnd_large_value_is_string_in_json() {
    let o = bnd(&["--json", "bnd", "--ambient", "3", "--degrees", "1000000"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["bnd"].is_string(), "{v}");
}

#[test]
fn bnd_from_profile_matches_degrees() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.json",
        r#"{"ambient":3,"degrees":[2,3],"m":1,"fundamental_degree":6,"polar_degrees":[6,18]}"#,
    );
    let a = bnd(&["bnd", "--profile", &p]);
    let b = bnd(&["bnd", "--ambient", "3", "--degrees", "2,3"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn bnd_usage_errors() {
    assert_eq!(
        bnd(&["bnd", "--ambient", "2", "--degrees", "2,2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(bnd(&["bnd", "--degrees", "2"]).status.code(), Some(2));
    assert_eq!(
        bnd(&["bnd", "--ambient", "2", "--degrees", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn edd_values() {
    assert_eq!(
        stdout(&bnd(&["edd", "--ambient", "2", "--degrees", "5"])).trim(),
        "25"
    );
    assert_eq!(
        stdout(&bnd(&["edd", "--ambient", "3", "--degrees", "2,3"])).trim(),
        "24"
    );
    assert_eq!(
        stdout(&bnd(&["edd", "--ambient", "2", "--degrees", "1"])).trim(),
        "1"
    );
}

#[test]
fn system_roundtrip_and_refusal() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ell.txt", "vars: x1 x2\nx1^2 + 4*x2^2 - 4\n");
    let out = dir.path().join("sys.txt");
    let o = bnd(&[
        "system",
        "--input",
        &f,
        "--form",
        "minor",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("vars: x1 x2 y1 y2"));
    assert!(text.contains("# formulation: minor"));
    assert_eq!(
        text.lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("vars"))
            .count(),
        4
    );

    // generated systems are not valid solver input
    assert_eq!(
        bnd(&["solve", "--input", out.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn system_lagrange_homotopy() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.txt", "vars: x1 x2\nx1^2 + 4*x2^2 - 4\n");
    let g = write(dir.path(), "g.txt", "vars: x1 x2\nx1^2 + x2^2 - 1\n");
    let o = bnd(&[
        "system", "--input", &f, "--form", "lagrange", "--start", &g, "--gamma", "0.5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.lines().next().unwrap().ends_with(" t"), "{s}");

    let o = bnd(&["system", "--input", &f, "--form", "minor", "--start", &g]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn system_parse_error_is_located() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.txt", "vars: x1 x2\nx1^2 + * x3\n");
    let o = bnd(&["system", "--input", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("2:"));
}

#[test]
fn solve_ellipse() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ell.txt", "vars: x1 x2\nx1^2 + 4*x2^2 - 4\n");
    let plot = dir.path().join("plot.txt");
    let o = bnd(&[
        "--json",
        "solve",
        "--input",
        &f,
        "--box",
        "3",
        "--plot",
        plot.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let pairs = v["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 2);
    assert!((pairs[0]["separation"].as_f64().unwrap() - 2.0).abs() < 1e-8);
    assert!((v["narrowest"]["b"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(v["complex_bound"], 2);
    assert!(plot.exists());
}

#[test]
fn solve_bad_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ell.txt", "vars: x1 x2\nx1^2 + 4*x2^2 - 4\n");
    assert_eq!(
        bnd(&["solve", "--input", &f, "--bounds", "-1:1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bnd(&["solve", "--input", &f, "--bounds", "-1:1,abc"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn check_fast_reports_each_row() {
    let o = bnd(&["--json", "check", "--fast"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    let failed = rows.iter().any(|r| r["passed"] == false);
    assert_eq!(o.status.code(), Some(if failed { 1 } else { 0 }));
}
