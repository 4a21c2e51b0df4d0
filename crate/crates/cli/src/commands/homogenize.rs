//! `homogenize`: the limiting integral equation, the effective medium
//! maps and a convergence study of particle clouds towards the limit.

use std::path::Path;

use serde_json::json;
use smallscat::grid::CubeGrid;
use smallscat::io::{float_field, write_field, write_medium, Table};
use smallscat::linalg::GmresOptions;
use smallscat::manybody::{assemble_full, place_particles, reduce_to_cubes, SolveMethod};
use smallscat::medium::{LimitKind, LimitOptions, MediumGrid};
use smallscat::{ComplexVec3, Point, WaveContext};

use super::{complex_json, solve_method, vec_norm};
use crate::config::{load, HomogenizeConfig, SolverChoice};
use crate::{CliError, CommandOutput, OutDir};

/// Unknown count above which the automatic choice turns iterative.
const AUTO_DENSE_LIMIT: usize = 6000;

const SWEEP_HEADER: [&str; 6] =
    ["a", "particles", "d_min", "max_abs_difference", "max_relative_difference", "residual"];

pub fn run(path: &Path, out: &mut OutDir) -> Result<CommandOutput, CliError> {
    let cfg: HomogenizeConfig = load(path)?;
    let ctx = cfg.wave.context()?;
    let h = &cfg.homogenize;
    let base = cfg.cloud.build(&ctx, cfg.cloud.a)?;
    let kind = LimitKind::from_cloud(&base);

    let grid = CubeGrid::new(base.domain, h.grid_side)?;
    let medium = MediumGrid::sample(grid, &base.density, &base.impedance)?;
    let iterative = match h.solver {
        SolverChoice::Iterative => true,
        SolverChoice::Dense => false,
        SolverChoice::Auto => 3 * medium.len() > AUTO_DENSE_LIMIT,
    };
    let opts = LimitOptions { self_term: h.self_term, iterative: iterative.then(GmresOptions::default) };
    let medium = medium.solve_limit_ie(&ctx, &kind, &opts)?;
    write_field(out.file("limit_field.csv")?, &medium.grid().centers(), medium.field()?)?;
    let effective = medium.effective_medium(&ctx, &kind)?;
    write_medium(out.file("medium.csv")?, &medium, &effective)?;

    let probes = h.probe_points();
    let limit_probe = medium.evaluate_fields(&ctx, &probes)?;
    write_field(out.file("limit_probes.csv")?, &probes, &limit_probe)?;

    let sweep = if h.sweep_a.is_empty() {
        None
    } else {
        Some(convergence_study(out, &cfg, &ctx, &probes, &limit_probe, solve_method(h.solver))?)
    };

    let riemann = if h.check_riemann_sum { Some(riemann_sum_gap(&cfg, &ctx, &kind)?) } else { None };

    Ok(CommandOutput::complete(json!({
        "cells": medium.len(),
        "grid_side": medium.grid().side(),
        "limit_residual": medium.residual()?,
        "limit_kind": limit_kind_json(&kind),
        "self_term": h.self_term,
        "n_range": range(effective.n.iter().map(|z| z.re)),
        "mu_range": range(effective.mu_eff.iter().map(|z| z.re)),
        "sweep": sweep,
        "riemann_sum_max_relative_gap": riemann,
    })))
}

fn limit_kind_json(kind: &LimitKind) -> serde_json::Value {
    match kind {
        LimitKind::Impedance { c0, tau } => {
            let rows: Vec<Vec<serde_json::Value>> =
                (0..3).map(|i| (0..3).map(|j| complex_json(tau[(i, j)])).collect()).collect();
            json!({ "kind": "impedance", "c0": c0, "tau": rows })
        }
        LimitKind::Pec { c_d, c_gamma } => json!({ "kind": "pec", "c_d": c_d, "c_gamma": complex_json(*c_gamma) }),
    }
}

fn range(values: impl Iterator<Item = f64>) -> [f64; 2] {
    values.fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], v| [lo.min(v), hi.max(v)])
}

fn convergence_study(
    out: &mut OutDir,
    cfg: &HomogenizeConfig,
    ctx: &WaveContext,
    probes: &[Point],
    limit: &[ComplexVec3],
    method: SolveMethod,
) -> Result<serde_json::Value, CliError> {
    let mut table = Table::new(out.file("convergence.csv")?, &SWEEP_HEADER)?;
    let (mut sizes, mut counts, mut diffs) = (vec![], vec![], vec![]);
    for &a in &cfg.homogenize.sweep_a {
        let cloud = place_particles(&cfg.cloud.build(ctx, a)?)?;
        let sol = assemble_full(&cloud, ctx)?.solve(method)?;
        let e = sol.evaluate_fields(ctx, probes)?;
        let (mut abs, mut rel) = (0.0f64, 0.0f64);
        for (c, l) in e.iter().zip(limit) {
            let d = vec_norm(&(c - l));
            abs = abs.max(d);
            rel = rel.max(d / vec_norm(l));
        }
        table.row(&[
            float_field(a),
            cloud.len().to_string(),
            float_field(cloud.d_min()),
            float_field(abs),
            float_field(rel),
            float_field(sol.residual),
        ])?;
        sizes.push(a);
        counts.push(cloud.len());
        diffs.push(abs);
    }
    table.finish()?;
    Ok(json!({
        "a": sizes,
        "particles": counts,
        "max_abs_difference": diffs,
        "monotone": super::strictly_decreasing_by(&sizes, &diffs),
    }))
}

/// Largest entry of `|reduced - limit|` relative to the largest entry of
/// the limit matrix, on the cloud's own cube partition.
fn riemann_sum_gap(cfg: &HomogenizeConfig, ctx: &WaveContext, kind: &LimitKind) -> Result<f64, CliError> {
    let cloud_cfg = cfg.cloud.build(ctx, cfg.cloud.a)?;
    let cloud = place_particles(&cloud_cfg)?;
    let reduced = reduce_to_cubes(&cloud, ctx)?.matrix();
    let limit = MediumGrid::from_cloud(&cloud_cfg)?.limit_matrix(ctx, kind, &LimitOptions::default())?;
    let mut scale = 0.0f64;
    let mut gap = 0.0f64;
    for j in 0..limit.ncols() {
        for i in 0..limit.nrows() {
            scale = scale.max(limit[(i, j)].norm());
            gap = gap.max((limit[(i, j)] - reduced[(i, j)]).norm());
        }
    }
    Ok(gap / scale)
}
