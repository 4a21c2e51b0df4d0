//! One driver per subcommand.

pub mod bie;
pub mod design;
pub mod homogenize;
pub mod scatter;
pub mod shape;

use serde_json::{json, Value};
use smallscat::io::{complex_fields, float_field};
use smallscat::linalg::GmresOptions;
use smallscat::manybody::SolveMethod;
use smallscat::{CloudSolution, Complex64, ComplexVec3, Point};

use crate::config::SolverChoice;

pub(crate) fn solve_method(choice: SolverChoice) -> SolveMethod {
    match choice {
        SolverChoice::Auto => SolveMethod::Auto,
        SolverChoice::Dense => SolveMethod::Dense,
        SolverChoice::Iterative => SolveMethod::Iterative(GmresOptions::default()),
    }
}

pub(crate) fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub(crate) fn vec_norm(v: &ComplexVec3) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn solution_json(s: &CloudSolution) -> Value {
    json!({
        "unknowns": 3 * s.len(),
        "residual": s.residual,
        "condition": s.condition,
        "iterations": s.iterations,
    })
}

pub(crate) fn push_point(row: &mut Vec<String>, x: &Point) {
    row.extend(x.iter().map(|c| float_field(*c)));
}

pub(crate) fn push_vec(row: &mut Vec<String>, v: &ComplexVec3) {
    for c in v.iter() {
        row.extend(complex_fields(*c));
    }
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// True when `values`, ordered by decreasing `key`, decrease strictly.
pub(crate) fn strictly_decreasing_by(key: &[f64], values: &[f64]) -> bool {
    let mut idx: Vec<usize> = (0..key.len()).collect();
    idx.sort_by(|&i, &j| key[j].total_cmp(&key[i]));
    idx.windows(2).all(|w| values[w[1]] < values[w[0]])
}
