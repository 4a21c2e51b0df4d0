//! Behaviour of the `smallscat` binary: exit statuses, output files and
//! the run summary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const WAVE: &str = r#"
[wave]
omega = 1.0
direction = [0.0, 0.0, 1.0]
polarization = [1.0, 0.0, 0.0]
"#;

fn scatter_config(density: f64, a: f64) -> String {
    format!(
        r#"{WAVE}
[cloud]
domain = {{ corner = [0.0, 0.0, 0.0], extents = [1.0, 1.0, 1.0] }}
density = {{ type = "constant", value = {density:?} }}
impedance = {{ type = "constant", value = [0.1, 0.1] }}
particle = "impedance"
a = {a:?}
kappa = 0.5
cube_side = 0.5

[scatter]
level = "full"
probes = [[0.5, 0.5, 2.0], [-1.0, 0.3, 0.2]]
field_grid = {{ corner = [-0.5, -0.5, 1.5], extents = [2.0, 2.0, 0.0], counts = [3, 3, 1] }}
far_field_directions = 6
"#
    )
}

fn design_config(value: &str) -> String {
    format!(
        r#"{WAVE}
[design]
domain = {{ corner = [0.0, 0.0, 0.0], extents = [1.0, 1.0, 1.0] }}
grid_side = 0.25
density = {{ type = "constant", value = 1.0 }}
shape = {{ kind = "sphere" }}
target = "refraction_index"
value = {value}
"#
    )
}

struct Run {
    output: Output,
    out: PathBuf,
    _dir: tempfile::TempDir,
}

impl Run {
    fn code(&self) -> i32 {
        self.output.status.code().expect("exit status")
    }

    fn summary(&self) -> Value {
        serde_json::from_slice(&std::fs::read(self.out.join("summary.json")).expect("summary.json")).unwrap()
    }

    fn table(&self, name: &str) -> (Vec<String>, Vec<Vec<f64>>) {
        let text = std::fs::read_to_string(self.out.join(name)).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(|s| s.parse().unwrap()).collect()).collect();
        (header, rows)
    }
}

fn run(command: &str, config: Option<&str>) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_smallscat"));
    cmd.args([command, "--threads", "1", "--out"]).arg(&out);
    if let Some(text) = config {
        let path = dir.path().join("config.toml");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(&path);
    }
    let output = cmd.output().unwrap();
    Run { output, out, _dir: dir }
}

fn stderr(r: &Run) -> String {
    String::from_utf8_lossy(&r.output.stderr).into_owned()
}

#[test]
fn missing_config_is_a_configuration_error() {
    let r = run("scatter", None);
    assert_eq!(r.code(), 2, "{}", stderr(&r));
}

#[test]
fn malformed_and_unknown_keys_are_configuration_errors() {
    assert_eq!(run("scatter", Some("[wave\nomega = 1.0")).code(), 2);
    let extra = scatter_config(1.0, 0.02).replace("kappa = 0.5", "kappa = 0.5\ncolour = 3");
    let r = run("scatter", Some(&extra));
    assert_eq!(r.code(), 2);
    assert!(stderr(&r).contains("colour"), "{}", stderr(&r));
}

#[test]
fn invalid_wave_is_a_configuration_error() {
    let bad = scatter_config(1.0, 0.02).replace("polarization = [1.0, 0.0, 0.0]", "polarization = [0.0, 0.0, 1.0]");
    let r = run("scatter", Some(&bad));
    assert_eq!(r.code(), 2);
    assert_eq!(r.summary()["status"], "error");
}

#[test]
fn overfull_cubes_are_a_regime_error() {
    let r = run("scatter", Some(&scatter_config(1.0e4, 0.02)));
    assert_eq!(r.code(), 3, "{}", stderr(&r));
    assert_eq!(r.summary()["exit_code"], 3);
}

#[test]
fn empty_cloud_reproduces_the_incident_wave() {
    let r = run("scatter", Some(&scatter_config(0.0, 0.02)));
    assert_eq!(r.code(), 0, "{}", stderr(&r));
    let (header, rows) = r.table("field.csv");
    assert_eq!(header.len(), 9);
    assert_eq!(rows.len(), 9);
    for row in rows {
        // E0 = x̂ exp(i z) with k = 1.
        let z = row[2];
        assert!((row[3] - z.cos()).abs() <= 1e-14 && (row[4] - z.sin()).abs() <= 1e-14);
        assert!(row[5..].iter().all(|v| *v == 0.0));
    }
    let s = r.summary();
    assert_eq!(s["status"], "ok");
    assert_eq!(s["command"], "scatter");
    assert!(s["files"].as_array().unwrap().iter().any(|f| f == "field.csv"));
}

#[test]
fn scatter_writes_every_table() {
    let r = run("scatter", Some(&scatter_config(1.0, 0.02)));
    assert_eq!(r.code(), 0, "{}", stderr(&r));
    for name in ["cloud.csv", "probes.csv", "field.csv", "far_field.csv", "summary.json"] {
        assert!(Path::new(&r.out.join(name)).is_file(), "{name} missing");
    }
    let (_, cloud) = r.table("cloud.csv");
    assert_eq!(r.summary()["metrics"]["particles"], cloud.len());
    let (_, far) = r.table("far_field.csv");
    assert_eq!(far.len(), 6);
}

#[test]
fn shape_reports_sphere_constants() {
    let cfg = "refinements = [1, 2]\n[shape]\nkind = \"sphere\"\n";
    let r = run("shape", Some(cfg));
    assert_eq!(r.code(), 0, "{}", stderr(&r));
    let (header, rows) = r.table("shape.csv");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].len(), header.len());
    assert!(r.out.join("mesh.off").is_file());
}

#[test]
fn feasible_design_succeeds() {
    let r = run("design", Some(&design_config(r#"{ type = "constant", value = [1.5, 0.1] }"#)));
    assert_eq!(r.code(), 0, "{}", stderr(&r));
    let (header, rows) = r.table("design.csv");
    assert_eq!(rows.len(), 64);
    let feasible = header.iter().position(|h| h == "feasible").unwrap();
    assert!(rows.iter().all(|row| row[feasible] == 1.0));
}

#[test]
fn infeasible_design_is_a_regime_error() {
    let r = run("design", Some(&design_config(r#"{ type = "constant", value = [1.5, -0.1] }"#)));
    assert_eq!(r.code(), 3, "{}", stderr(&r));
}

#[test]
fn partly_feasible_design_reports_partial_status() {
    // Im n changes sign at x = 0.25, so only the first layer of cells is
    // realisable.
    let target = r#"{ type = "profile", profile = { type = "linear", value = [1.5, 0.1], gradient = [[0.0, -0.4], [0.0, 0.0], [0.0, 0.0]], origin = [0.0, 0.0, 0.0] } }"#;
    let r = run("design", Some(&design_config(target)));
    assert_eq!(r.code(), 5, "{}", stderr(&r));
    assert_eq!(r.summary()["status"], "partial");
    let (header, rows) = r.table("design.csv");
    let feasible = header.iter().position(|h| h == "feasible").unwrap();
    assert_eq!(rows.iter().filter(|row| row[feasible] == 1.0).count(), 16);
}

#[test]
fn ellipsoid_tau_is_not_spherical() {
    let cfg = "refinements = [2]\n[shape]\nkind = \"ellipsoid\"\nsemi_axes = [1.0, 0.5, 0.25]\n";
    let r = run("shape", Some(cfg));
    assert_eq!(r.code(), 0, "{}", stderr(&r));
    let (header, rows) = r.table("shape.csv");
    let col = |name: &str| header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    let (t11, t33) = (rows[0][col("tau_xx")], rows[0][col("tau_zz")]);
    assert!((t11 - t33).abs() > 0.1, "tau_xx = {t11}, tau_zz = {t33}");
}

#[test]
fn unit_index_target_needs_no_impedance() {
    let r = run("design", Some(&design_config(r#"{ type = "constant", value = [1.0, 0.0] }"#)));
    assert_eq!(r.code(), 0, "{}", stderr(&r));
    let (header, rows) = r.table("design.csv");
    let (re, im) = (header.iter().position(|h| h == "re_h").unwrap(), header.iter().position(|h| h == "im_h").unwrap());
    assert!(rows.iter().all(|row| row[re] == 0.0 && row[im] == 0.0));
}
