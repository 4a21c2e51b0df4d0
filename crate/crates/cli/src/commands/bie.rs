//! `bie-validate`: boundary-integral moment of one small perfect conductor
//! against the closed form, over a size sweep.

use std::path::Path;

use serde_json::json;
use smallscat::bie::validate_pec;
use smallscat::io::{complex_fields, float_field, Table};

use super::{complex_json, fit_slope, strictly_decreasing_by, vec_norm};
use crate::config::{load, BieConfig};
use crate::{CliError, CommandOutput, OutDir};

const HEADER: [&str; 12] = [
    "ka",
    "a",
    "refinement",
    "abs_q_bie",
    "abs_q_asym",
    "relative_error",
    "re_gamma",
    "im_gamma",
    "re_c_gamma",
    "im_c_gamma",
    "consistency_residual",
    "tangential_defect",
];

pub fn run(path: &Path, out: &mut OutDir) -> Result<CommandOutput, CliError> {
    let cfg: BieConfig = load(path)?;
    let ctx = cfg.wave.context()?;
    if cfg.ka.is_empty() || cfg.ka.iter().any(|ka| !(*ka > 0.0 && ka.is_finite())) {
        return Err(CliError::Invalid("ka must be a non-empty list of positive values".into()));
    }
    let k = ctx.k().norm();
    let mut table = Table::new(out.file("bie.csv")?, &HEADER)?;
    let (mut log_a, mut log_q, mut errors, mut gammas) = (vec![], vec![], vec![], vec![]);
    for &ka in &cfg.ka {
        let a = ka / k;
        let mesh = cfg.shape.mesh_of_size(a, cfg.refinement)?;
        let d = validate_pec(&mesh, cfg.refinement, &ctx)?;
        let q = vec_norm(&d.q_bie);
        let mut row = vec![float_field(d.ka), float_field(d.a), d.refinement.to_string()];
        for v in [q, vec_norm(&d.q_asym), d.relative_error] {
            row.push(float_field(v));
        }
        row.extend(complex_fields(d.gamma));
        row.extend(complex_fields(d.c_gamma));
        row.push(float_field(d.consistency_residual));
        row.push(float_field(d.tangential_defect));
        table.row(&row)?;
        log_a.push(d.a.ln());
        log_q.push(q.ln());
        errors.push(d.relative_error);
        gammas.push(d.gamma);
    }
    table.finish()?;
    let smallest = (0..cfg.ka.len()).min_by(|&i, &j| cfg.ka[i].total_cmp(&cfg.ka[j])).expect("non-empty");
    let gamma_spread = gammas.iter().map(|g| (g - gammas[smallest]).norm()).fold(0.0, f64::max);
    Ok(CommandOutput::complete(json!({
        "refinement": cfg.refinement,
        "ka": cfg.ka,
        "relative_error": errors,
        "relative_error_at_smallest_ka": errors[smallest],
        "error_decreasing_with_ka": strictly_decreasing_by(&cfg.ka, &errors),
        "moment_slope": fit_slope(&log_a, &log_q),
        "gamma_at_smallest_ka": complex_json(gammas[smallest]),
        "gamma_spread": gamma_spread,
    })))
}
