//! `shape`: constants of the particle shape per mesh refinement.

use std::path::Path;

use serde_json::json;
use smallscat::io::{complex_fields, float_field, Table};
use smallscat::shape::{half_identity_check, tau_tensor, ShapeConstants};
use smallscat::Complex64;

use crate::config::{load, ShapeConfig};
use crate::{CliError, CommandOutput, OutDir};

const HEADER: [&str; 17] = [
    "refinement",
    "faces",
    "surface_area",
    "volume",
    "c_d",
    "c_s",
    "tau_xx",
    "tau_xy",
    "tau_xz",
    "tau_yx",
    "tau_yy",
    "tau_yz",
    "tau_zx",
    "tau_zy",
    "tau_zz",
    "re_half",
    "im_half",
];

pub fn run(path: &Path, out: &mut OutDir) -> Result<CommandOutput, CliError> {
    let cfg: ShapeConfig = load(path)?;
    if cfg.refinements.is_empty() {
        return Err(CliError::Invalid("refinements must not be empty".into()));
    }
    if !(cfg.half_identity_ka >= 0.0 && cfg.half_identity_ka.is_finite()) {
        return Err(CliError::Invalid("half_identity_ka must be finite and non-negative".into()));
    }
    let mut table = Table::new(out.file("shape.csv")?, &HEADER)?;
    let mut max_trace_error = 0.0f64;
    let mut last = None;
    for &r in &cfg.refinements {
        let mesh = cfg.shape.mesh(r)?;
        let consts = ShapeConstants::from_mesh(&mesh);
        let tau = tau_tensor(&mesh);
        max_trace_error = max_trace_error.max((tau.trace() - 2.0).abs());
        let k = Complex64::new(cfg.half_identity_ka / mesh.size(), 0.0);
        let half = half_identity_check(&mesh, k);
        let mut row = vec![r.to_string(), mesh.face_count().to_string()];
        for v in [consts.surface_area, consts.volume, consts.c_d, consts.c_s] {
            row.push(float_field(v));
        }
        for i in 0..3 {
            for j in 0..3 {
                row.push(float_field(tau[(i, j)]));
            }
        }
        row.extend(complex_fields(half));
        table.row(&row)?;
        last = Some((r, mesh, consts, half));
    }
    table.finish()?;
    let (r, mesh, consts, half) = last.expect("refinements not empty");
    mesh.write_off(out.file("mesh.off")?)
        .map_err(|e| CliError::Io { path: out.path().join("mesh.off").display().to_string(), source: e })?;
    let tau: Vec<[f64; 3]> = (0..3).map(|i| [consts.tau[(i, 0)], consts.tau[(i, 1)], consts.tau[(i, 2)]]).collect();
    let sphere_deviation = consts.tau.iter().enumerate().map(|(n, v)| {
        let target = if n % 4 == 0 { 2.0 / 3.0 } else { 0.0 };
        (v - target).abs()
    });
    Ok(CommandOutput::complete(json!({
        "finest_refinement": r,
        "faces": mesh.face_count(),
        "c_d": consts.c_d,
        "c_s": consts.c_s,
        "tau": tau,
        "tau_eigenvalues": consts.tau_eigenvalues(),
        "tau_max_deviation_from_two_thirds": sphere_deviation.fold(0.0, f64::max),
        "max_trace_error": max_trace_error,
        "half_identity": super::complex_json(half),
    })))
}
