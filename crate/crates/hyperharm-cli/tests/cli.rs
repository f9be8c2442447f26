use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperharm")).args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> Vec<f64> {
    let line = text.lines().find(|l| l.starts_with(&format!("{key} "))).expect(key);
    line.split_whitespace().skip(1).map(|t| t.parse().unwrap()).collect()
}

fn write_circle(path: &Path, n: usize, f: impl Fn(f64) -> (f64, f64)) {
    let samples: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let (re, im) = f(2.0 * std::f64::consts::PI * k as f64 / n as f64);
            [re, im]
        })
        .collect();
    let v = serde_json::json!({ "N": n, "samples": samples });
    std::fs::write(path, v.to_string()).unwrap();
}

#[test]
fn cohomology_dims() {
    let o = run(&["cohomology-dims"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "9 3 6");
}

#[test]
fn kernel_mass_report() {
    let o = run(&["kernel-mass", "--eps", "0.01"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    let haar = field(&s, "haar");
    assert!(haar[0].abs() < 1e-10 && (haar[1] - 1.0).abs() < 1e-10);
    let (num, cf) = (field(&s, "numeric"), field(&s, "closed_form"));
    assert!((num[0] - cf[0]).abs() + (num[1] - cf[1]).abs() < 1e-7);
    assert!(field(&s, "difference")[0] < 1e-7);
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(run(&["construct", "--qd", "cubic:1"]).status.code(), Some(2));
    assert_eq!(run(&["construct", "--qd", "monomial:1", "--grid", "0:1:2"]).status.code(), Some(2));
    assert_eq!(run(&["construct", "--qd", "monomial:1", "--grid", "0:1:2,-1:1:3"]).status.code(), Some(2));
    assert_eq!(run(&["kernel-mass", "--eps", "2"]).status.code(), Some(2));
    assert_eq!(run(&["theta", "--L", "8"]).status.code(), Some(2));
    assert_eq!(run(&["split-circle", "--in", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(run(&["classify"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn failed_checks_exit_1() {
    let o = run(&["check-harmonic", "--qd", "monomial:2", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(field(&stdout(&o), "max_residual")[0] > 0.0);
    assert_eq!(run(&["kernel-mass", "--eps", "0.01", "--tol", "1e-300"]).status.code(), Some(1));
}

#[test]
fn checks_pass_at_default_tolerance() {
    let o = run(&["check-harmonic", "--qd", "monomial:2"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["beta", "--qd", "shifted:2:0.5:-0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(field(&stdout(&o), "max_error")[0] < 1e-5);
}

#[test]
fn construct_is_byte_reproducible() {
    let args = ["construct", "--qd", "rational:(z+i)^-4", "--grid", "-1:1:4,0.5:2:3"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,y,re_xi,im_xi,r1,r2,re_f,im_f");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|t| t.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 12);
    for r in &rows {
        // β against (z + i)⁻⁴ computed here
        let (x, y) = (r[0], r[1] + 1.0);
        let m2 = x * x + y * y;
        let (u2r, u2i) = ((x * x - y * y) / (m2 * m2), -2.0 * x * y / (m2 * m2));
        let (ere, eim) = (u2r * u2r - u2i * u2i, 2.0 * u2r * u2i);
        assert!((r[6] - ere).abs() + (r[7] - eim).abs() < 1e-5);
        assert!(r[4].abs() < 1e-5 && r[5].abs() < 1e-5);
    }
}

#[test]
fn construct_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("xi.csv");
    let o = run(&["construct", "--qd", "monomial:0", "--grid", "0:1:2,1:2:2", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), 5);
}

#[test]
fn poisson_extend_of_rotation() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("rot.json");
    // X = iz
    write_circle(&p, 64, |t| (-t.sin(), t.cos()));
    let o = run(&["poisson-extend", "--in", p.to_str().unwrap(), "--radius", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|t| t.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 64);
    for r in rows {
        // ℱ(iz) = iz
        assert!((r[3] + r[2]).abs() < 1e-12 && (r[4] - r[1]).abs() < 1e-12);
    }
    let radial = dir.path().join("radial.json");
    write_circle(&radial, 64, |t| (t.cos(), t.sin()));
    assert_eq!(run(&["poisson-extend", "--in", radial.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn split_circle_reconstructs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.json");
    // z⁻¹ + z²
    write_circle(&p, 128, |t| (t.cos() + (2.0 * t).cos(), -t.sin() + (2.0 * t).sin()));
    let o = run(&["split-circle", "--in", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["reconstruction_error"].as_f64().unwrap() < 1e-14);
    assert_eq!(v["tangential"]["N"], 128);
    // tangential part is z⁻¹ − z³
    let s = &v["tangential"]["samples"][5];
    let t = 2.0 * std::f64::consts::PI * 5.0 / 128.0;
    assert!((s[0].as_f64().unwrap() - (t.cos() - (3.0 * t).cos())).abs() < 1e-13);
    assert!((s[1].as_f64().unwrap() - (-t.sin() - (3.0 * t).sin())).abs() < 1e-13);
    write_circle(&p, 100, |_| (0.0, 0.0));
    assert_eq!(run(&["split-circle", "--in", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn classify_group_and_maps() {
    let o = run(&["classify", "--group", "octagon"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r["class"] == "Hyperbolic" && r["fixed_points"].as_array().unwrap().len() == 2));

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("maps.json");
    let maps = r#"[{"model":"SL2R","a":[1,0],"b":[1,0],"c":[0,0],"d":[1,0]},
                   {"model":"SL2R","a":[0,0],"b":[-1,0],"c":[1,0],"d":[0,0]}]"#;
    std::fs::write(&p, maps).unwrap();
    let o = run(&["classify", "--in", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["class"], "Parabolic");
    assert_eq!(v[0]["fixed_points"][0], "inf");
    assert_eq!(v[1]["class"], "Elliptic");
    assert_eq!(v[1]["trace_sq"], 0.0);
}

#[test]
fn psi_of_zero_cocycle() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    let zero = serde_json::json!({
        "convention": "vector-field",
        "values": vec![serde_json::json!({"a": [0.0, 0.0], "b": 0.0}); 4],
    });
    std::fs::write(&p, zero.to_string()).unwrap();
    let o = run(&["psi", "--in", p.to_str().unwrap(), "--N", "256", "--L", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["value_at_0"], serde_json::json!([0.0, 0.0]));
    assert_eq!(v["boundary_normal_defect"], 0.0);
    assert_eq!(run(&["psi", "--in", p.to_str().unwrap(), "--N", "100"]).status.code(), Some(2));
}

#[test]
fn theta_summary() {
    let o = run(&["theta", "--L", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["L"], 3);
    assert!(v["elements"].as_u64().unwrap() > 100);
    assert!(v["relative_defect"].as_f64().unwrap() < 1.0);
}

#[test]
fn verify_all_fast() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("report.json");
    let o = run(&["verify-all", "--fast", "--out", p.to_str().unwrap()]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(o.status.code(), Some(0), "{err}");
    assert_eq!(err.lines().filter(|l| l.starts_with("PASS ")).count(), 11);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(v["all_pass"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 25);
}
