use std::process::Command;

fn qcurv() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qcurv"))
}

fn rows(stdout: &[u8]) -> Vec<Vec<f64>> {
    String::from_utf8_lossy(stdout)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn sphere_curvature_is_six() {
    let out = qcurv().args(["curvature", "--profile", "sphere:lambda=2", "--radii", "0,0.5,3"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = rows(&out.stdout);
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert!((row[3] - 6.0).abs() < 1e-10, "{row:?}");
    }
}

#[test]
fn potential_far_field_slope() {
    let out = qcurv()
        .args(["potential", "--density", "bump:alpha0=0.5,radius=2", "--radii", "1000"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let row = &rows(&out.stdout)[0];
    assert!((row[0] * row[2] + 0.5).abs() < 1e-5, "{row:?}");
}

#[test]
fn kernel_table_is_symmetric() {
    let out = qcurv().args(["kernel-table", "--n", "6", "--kernel", "4", "--radii", "0.5,1,3"]).output().unwrap();
    assert!(out.status.success());
    let rows = rows(&out.stdout);
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(rows[i][j + 1], rows[j][i + 1]);
        }
        let max = rows[i][0].max(rows[0][0]);
        assert!((rows[i][1] - max.powi(-4)).abs() < 1e-10);
    }
}

#[test]
fn verify_subset_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcurv()
        .args(["verify", "--only", "kernel.f4_closed_form,jensen.randomized"])
        .env("QCURV_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS   kernel.f4_closed_form"));
    assert!(text.contains("digest "));
    for ext in ["csv", "json", "txt"] {
        assert!(dir.path().join(format!("report.{ext}")).exists());
    }
}

#[test]
fn verify_with_empty_roster_reports_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.toml");
    std::fs::write(&cfg, format!("roster = []\noutput_dir = {:?}\n", dir.path().join("out"))).unwrap();
    let out = qcurv().args(["verify", "--json", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "[]");
    let csv = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert_eq!(csv, "id,anchor,expected,measured,tol,pass,runtime_ms\n");
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.toml");
    std::fs::write(&cfg, "dimensions = [4]\ncolour = 3\n").unwrap();
    let out = qcurv().args(["verify", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
    let out = qcurv().args(["verify", "--only", "no.such.check"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_writes_state() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state.json");
    let out = qcurv()
        .args(["solve", "--q", "gaussian:amplitude=0.1,width=1", "--radii", "0,1"])
        .arg("--state")
        .arg(&state)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let st: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&state).unwrap()).unwrap();
    assert!(st["residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(rows(&out.stdout).len(), 2);
}

#[test]
fn end_and_functionals_emit_json() {
    let out = qcurv().args(["end", "--alpha1", "-1"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["nu"]["estimate"]["limit"].as_f64().unwrap().abs() < 1e-3);
    let out = qcurv().args(["functionals", "--profile", "sphere:lambda=1"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["alpha0"].as_f64().unwrap() - 2.0).abs() < 1e-8);
    assert_eq!(v["completeness"], "incomplete");
}
