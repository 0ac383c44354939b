use std::path::Path;
use std::process::{Command, Output};

use tavis_cpa::sweep::parse_csv;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tavis-cpa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_params(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn cpa_solve_prints_both_branches() {
    let o = run(&["cpa", "solve", "--g", "10", "--gamma", "1", "--kappa", "1", "--J", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3, "{text}");
    assert!(lines[1].starts_with("\"(+,-)\",14.1067"));
    assert!(lines[2].starts_with("\"(-,+)\",-14.1067"));
}

#[test]
fn spectrum_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let params = write_params(dir.path(), "doublet.json", r#"{"g": 10, "gamma": 1, "kappa": 1, "J": 0}"#);
    let out = dir.path().join("doublet.csv");
    let o = run(&["spectrum", "--params", &params, "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("x,out_l,out_r,cavity,atoms\n"));
    assert!(text.lines().skip(1).all(|l| l.split(',').count() == 5));
    let rows = parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 601);
}

#[test]
fn spectrum_output_is_byte_identical_across_runs() {
    let a = run(&["spectrum", "--J", "15", "--points", "257"]);
    let b = run(&["spectrum", "--J", "15", "--points", "257"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sweep_section_of_parameter_file_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let params = write_params(
        dir.path(),
        "emitter_axis.json",
        r#"{"J": 20, "delta_c": 15, "delta_eg": 0,
            "sweep": {"variable": "detuning", "start": -50, "stop": 10, "points": 7, "coupling_lock": true, "axis": "emitter"}}"#,
    );
    let o = run(&["spectrum", "--params", &params]);
    assert_eq!(o.status.code(), Some(0));
    let rows = parse_csv(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 7);
    assert_eq!((rows[0].x, rows[6].x), (-50.0, 10.0));
}

#[test]
fn phase_and_ddi_sweeps() {
    let o = run(&["phase", "--points", "5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);

    let o = run(&["ddi", "--delta-c", "14.106735979665885", "--delta-eg", "14.106735979665885"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = parse_csv(&stdout(&o)).unwrap();
    assert_eq!(rows.iter().map(|r| r.x).collect::<Vec<_>>(), [0.0, 5.0, 10.0, 15.0]);
    assert!(rows[0].out_l < 1e-18);
}

#[test]
fn cpa_scan_finds_doublet() {
    let o = run(&["cpa", "scan", "--start", "-30", "--stop", "30", "--points", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3, "{text}");
}

#[test]
fn dressed_reports_closed_form_and_ladder() {
    let o = run(&["dressed", "--J", "15", "--n-max", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("n,source,index,energy\n"));
    assert_eq!(text.lines().filter(|l| l.contains("closed-form")).count(), 4);
    assert_eq!(text.lines().filter(|l| l.contains("numeric")).count(), 6);
}

#[test]
fn relax_converges_for_weak_drive() {
    let o = run(&["relax", "--amp", "1e-3", "--J", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().split(',').nth(1) == Some("true"));
}

#[test]
fn relax_trace_has_header() {
    let o = run(&["relax", "--amp", "1e-3", "--trace", "1", "--stride", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("t,re_a,im_a,re_sigma1,im_sigma1,re_sigma2,im_sigma2,sz1,sz2\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn geometry_both_directions() {
    let o = run(&["geometry", "--gamma0", "1", "--omega-eg", "1", "--r12", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "J\n7.5000000000000000e-1\n");
    let o = run(&["geometry", "--gamma0", "1", "--omega-eg", "1", "--target-J", "0.75"]);
    assert_eq!(o.status.code(), Some(0));
    let r: f64 = stdout(&o).lines().nth(1).unwrap().parse().unwrap();
    assert!((r - 1.0).abs() < 1e-12);
    let o = run(&["geometry", "--gamma0", "1", "--omega-eg", "1", "--r12", "0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = run(&["spectrum", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_parameters_exit_with_validation_code() {
    let o = run(&["spectrum", "--gamma", "-1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("negative decay rate"));

    let dir = tempfile::tempdir().unwrap();
    let params = write_params(dir.path(), "bad.json", r#"{"gama": 1}"#);
    assert_eq!(run(&["spectrum", "--params", &params]).status.code(), Some(3));
    assert_eq!(run(&["spectrum", "--params", "/nonexistent/p.json"]).status.code(), Some(3));
}

#[test]
fn singular_system_exits_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let params = write_params(dir.path(), "singular.json", r#"{"delta_eg2": 1e15}"#);
    let o = run(&["ddi", "--params", &params]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular"));
}
