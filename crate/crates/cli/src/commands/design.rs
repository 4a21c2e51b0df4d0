//! `design`: the impedance profile `h(x)` realising a target refraction
//! coefficient or permeability, with a forward check of every cell.

use std::path::Path;

use serde_json::json;
use smallscat::grid::{CubeGrid, DomainBox};
use smallscat::io::{complex_fields, float_field, Table};
use smallscat::medium::{design_h_for_mu, design_h_for_n, permeability, refraction_coefficient};
use smallscat::{Complex64, Error};

use super::push_point;
use crate::config::{load, DesignConfig, DesignTarget};
use crate::{CliError, CommandOutput, OutDir};

const HEADER: [&str; 13] = [
    "x",
    "y",
    "z",
    "n_density",
    "re_target",
    "im_target",
    "feasible",
    "re_h",
    "im_h",
    "re_achieved",
    "im_achieved",
    "round_trip_error",
    "re_n",
];

pub fn run(path: &Path, out: &mut OutDir) -> Result<CommandOutput, CliError> {
    let cfg: DesignConfig = load(path)?;
    let ctx = cfg.wave.context()?;
    let d = &cfg.design;
    let domain = DomainBox::new(d.domain.corner, d.domain.extents)?;
    let grid = CubeGrid::new(domain, d.grid_side)?;
    let c0 = d.shape.constants()?.c_s;
    let centers = grid.centers();
    let density: Vec<f64> = centers.iter().map(|x| d.density.at(x)).collect();
    let targets: Vec<Complex64> = centers.iter().map(|x| d.value.at(x)).collect();
    let report = match d.target {
        DesignTarget::RefractionIndex => design_h_for_n(&targets, &density, &ctx, c0)?,
        DesignTarget::Permeability => design_h_for_mu(&targets, &density, &ctx, c0)?,
    };

    let mut table = Table::new(out.file("design.csv")?, &HEADER)?;
    let mut max_round_trip = 0.0f64;
    let mut min_re_h = f64::INFINITY;
    let mut min_re_n = f64::INFINITY;
    for (p, x) in centers.iter().enumerate() {
        let mut row = Vec::with_capacity(HEADER.len());
        push_point(&mut row, x);
        row.push(float_field(density[p]));
        row.extend(complex_fields(targets[p]));
        match report.h[p] {
            Some(h) => {
                let n = refraction_coefficient(h, density[p], &ctx, c0)?;
                let achieved = match d.target {
                    DesignTarget::RefractionIndex => n,
                    DesignTarget::Permeability => permeability(h, density[p], &ctx, c0)?,
                };
                let err = (achieved - targets[p]).norm() / targets[p].norm();
                max_round_trip = max_round_trip.max(err);
                min_re_h = min_re_h.min(h.re);
                min_re_n = min_re_n.min(n.re);
                row.push("1".into());
                row.extend(complex_fields(h));
                row.extend(complex_fields(achieved));
                row.push(float_field(err));
                row.push(float_field(n.re));
            }
            None => {
                row.push("0".into());
                row.extend(std::iter::repeat_n(float_field(f64::NAN), 6));
            }
        }
        table.row(&row)?;
    }
    table.finish()?;

    let feasible = report.h.len() - report.infeasible.len();
    let metrics = json!({
        "cells": report.h.len(),
        "feasible": feasible,
        "infeasible_cells": report.infeasible,
        "infeasible_messages": report.messages,
        "max_round_trip_error": max_round_trip,
        "min_re_h": (feasible > 0).then_some(min_re_h),
        "min_re_n": (feasible > 0).then_some(min_re_n),
        "negative_refraction": feasible > 0 && min_re_n < 0.0,
        "c0": c0,
    });
    if !report.h.is_empty() && report.none_feasible() {
        return Err(Error::Infeasible(format!("no cell of the {} is realisable", report.h.len())).into());
    }
    let partial = (!report.all_feasible())
        .then(|| format!("{} of {} cells are not realisable", report.infeasible.len(), report.h.len()));
    Ok(CommandOutput { metrics, partial })
}
