//! `scatter`: places a cloud, solves the full and/or cube-reduced system
//! and writes fields, far-field amplitudes and regime diagnostics.

use std::path::Path;

use serde_json::json;
use smallscat::io::{float_field, write_cloud, write_far_field, write_field, Table};
use smallscat::manybody::{assemble_full, place_particles, reduce_to_cubes};
use smallscat::{CloudSolution, ComplexVec3, Point, WaveContext};

use super::{push_point, push_vec, solution_json, solve_method, vec_norm};
use crate::config::{load, sphere_directions, LevelChoice, ScatterConfig};
use crate::{CliError, CommandOutput, OutDir};

const COMPARISON_HEADER: [&str; 16] = [
    "x",
    "y",
    "z",
    "re_ex_full",
    "im_ex_full",
    "re_ey_full",
    "im_ey_full",
    "re_ez_full",
    "im_ez_full",
    "re_ex_reduced",
    "im_ex_reduced",
    "re_ey_reduced",
    "im_ey_reduced",
    "re_ez_reduced",
    "im_ez_reduced",
    "relative_difference",
];

pub fn run(path: &Path, out: &mut OutDir) -> Result<CommandOutput, CliError> {
    let cfg: ScatterConfig = load(path)?;
    let ctx = cfg.wave.context()?;
    let cloud_cfg = cfg.cloud.build(&ctx, cfg.cloud.a)?;
    let cloud = place_particles(&cloud_cfg)?;
    let report = cloud.validity_report(&ctx, cfg.scatter.thresholds.unwrap_or_default())?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    write_cloud(out.file("cloud.csv")?, &cloud)?;

    let method = solve_method(cfg.scatter.solver);
    let level = cfg.scatter.level;
    let full = match level {
        LevelChoice::Full | LevelChoice::Both => Some(assemble_full(&cloud, &ctx)?.solve(method)?),
        LevelChoice::Reduced => None,
    };
    let reduced = match level {
        LevelChoice::Reduced | LevelChoice::Both => Some(reduce_to_cubes(&cloud, &ctx)?.solve(method)?),
        LevelChoice::Full => None,
    };
    let primary = full.as_ref().or(reduced.as_ref()).expect("one level solved");

    let probes = cfg.scatter.probe_points();
    let probe_fields = primary.evaluate_fields(&ctx, &probes)?;
    write_field(out.file("probes.csv")?, &probes, &probe_fields)?;

    let mut excluded = 0usize;
    if let Some(grid) = &cfg.scatter.field_grid {
        let all = grid.points()?;
        let kept: Vec<Point> = all.iter().filter(|x| !primary.in_near_field(x)).copied().collect();
        excluded = all.len() - kept.len();
        let fields = primary.evaluate_fields(&ctx, &kept)?;
        write_field(out.file("field.csv")?, &kept, &fields)?;
    }

    let directions = sphere_directions(cfg.scatter.far_field_directions);
    let amplitudes: Vec<ComplexVec3> = directions.iter().map(|b| primary.far_field_amplitude(b)).collect();
    write_far_field(out.file("far_field.csv")?, &directions, &amplitudes)?;
    let transversality = directions
        .iter()
        .zip(&amplitudes)
        .map(|(b, a)| (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).norm() / vec_norm(a).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);

    let max_relative_difference = match (&full, &reduced) {
        (Some(_), Some(r)) => Some(compare(out, &ctx, r, &probes, &probe_fields)?),
        _ => None,
    };

    let grid = cloud.grid();
    Ok(CommandOutput::complete(json!({
        "particles": cloud.len(),
        "cubes": grid.len(),
        "cube_side": grid.side(),
        "d_min": finite_or_null(cloud.d_min()),
        "b_over_d": finite_or_null(grid.side() / cloud.d_min()),
        "validity": report,
        "thresholds": cfg.scatter.thresholds.unwrap_or_default(),
        "full": full.as_ref().map(solution_json),
        "reduced": reduced.as_ref().map(solution_json),
        "max_probe_field": CloudSolution::max_field_norm(&probe_fields),
        "max_relative_difference": max_relative_difference,
        "field_grid_points_excluded": excluded,
        "far_field_max_transversality": transversality,
    })))
}

fn finite_or_null(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Writes the probe comparison table and returns the largest
/// `|E_full - E_reduced| / |E_full|`.
fn compare(
    out: &mut OutDir,
    ctx: &WaveContext,
    reduced: &CloudSolution,
    probes: &[Point],
    full_fields: &[ComplexVec3],
) -> Result<f64, CliError> {
    let red_fields = reduced.evaluate_fields(ctx, probes)?;
    let mut table = Table::new(out.file("comparison.csv")?, &COMPARISON_HEADER)?;
    let mut worst = 0.0f64;
    for ((x, f), r) in probes.iter().zip(full_fields).zip(&red_fields) {
        let rel = vec_norm(&(f - r)) / vec_norm(f);
        worst = worst.max(rel);
        let mut row = Vec::with_capacity(COMPARISON_HEADER.len());
        push_point(&mut row, x);
        push_vec(&mut row, f);
        push_vec(&mut row, r);
        row.push(float_field(rel));
        table.row(&row)?;
    }
    table.finish()?;
    Ok(worst)
}
