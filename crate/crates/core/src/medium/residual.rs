//! Finite-difference check of the differential form of the limit,
//! `∇×∇×E = k²E/z - (2c₀/3iωμ) ∇(hN) × ∇×E / z`.

use num_complex::Complex64;

use super::effective::contrast;
use crate::em::{ComplexVec3, WaveContext};
use crate::grid::CubeGrid;
use crate::profile::Profile;
use crate::{Error, Result};

/// Largest `|∇×∇×E - RHS| / (|k|² |E|)` over interior cells, with central
/// differences on the cube-center lattice.
pub fn curlcurl_residual(
    grid: &CubeGrid,
    field: &[ComplexVec3],
    ctx: &WaveContext,
    h: &Profile<Complex64>,
    n: &Profile<f64>,
    c0: f64,
) -> Result<f64> {
    let counts = grid.counts();
    if counts.iter().any(|&c| c < 5) {
        return Err(Error::config(format!("grid too coarse for the residual: {counts:?} cells, need 5 per axis")));
    }
    if field.len() != grid.len() {
        return Err(Error::config("field length does not match the grid"));
    }
    let step = grid.side();
    let centers = grid.centers();
    let hn: Vec<Complex64> = centers.iter().map(|x| h.at(x) * n.at(x)).collect();
    let at = |idx: [isize; 3]| grid.index(idx[0] as usize, idx[1] as usize, idx[2] as usize);
    let shifted = |base: [isize; 3], a: usize, da: isize, b: usize, db: isize| {
        let mut i = base;
        i[a] += da;
        i[b] += db;
        at(i)
    };
    let k2 = ctx.k() * ctx.k();
    let factor = 2.0 * c0 / (3.0 * Complex64::i() * ctx.omega() * ctx.mu());
    let mut worst: f64 = 0.0;
    for l in 1..counts[2] - 1 {
        for j in 1..counts[1] - 1 {
            for i in 1..counts[0] - 1 {
                let base = [i as isize, j as isize, l as isize];
                let p = at(base);
                let e = field[p];
                // ∂_a ∂_b E (all components) and ∂_a E.
                let d2 = |a: usize, b: usize| -> ComplexVec3 {
                    if a == b {
                        (field[shifted(base, a, 1, b, 0)] - e * Complex64::from(2.0)
                            + field[shifted(base, a, -1, b, 0)])
                            * Complex64::from(1.0 / (step * step))
                    } else {
                        (field[shifted(base, a, 1, b, 1)]
                            - field[shifted(base, a, 1, b, -1)]
                            - field[shifted(base, a, -1, b, 1)]
                            + field[shifted(base, a, -1, b, -1)])
                            * Complex64::from(1.0 / (4.0 * step * step))
                    }
                };
                let d1 = |a: usize| -> ComplexVec3 {
                    (field[shifted(base, a, 1, a, 0)] - field[shifted(base, a, -1, a, 0)])
                        * Complex64::from(1.0 / (2.0 * step))
                };
                let mut curlcurl = ComplexVec3::zeros();
                for c in 0..3 {
                    let graddiv: Complex64 = (0..3).map(|b| d2(c, b)[b]).sum();
                    let lap: Complex64 = (0..3).map(|a| d2(a, a)[c]).sum();
                    curlcurl[c] = graddiv - lap;
                }
                let (dx, dy, dz) = (d1(0), d1(1), d1(2));
                let curl = ComplexVec3::new(dy[2] - dz[1], dz[0] - dx[2], dx[1] - dy[0]);
                let grad_hn = ComplexVec3::from_fn(|a, _| {
                    (hn[shifted(base, a, 1, a, 0)] - hn[shifted(base, a, -1, a, 0)]) / (2.0 * step)
                });
                let x = centers[p];
                let z = contrast(h.at(&x), n.at(&x), ctx, c0)?;
                let rhs = (e * k2 - grad_hn.cross(&curl) * factor) / z;
                let scale = k2.norm() * crate::em::cnorm(&e);
                if scale > 0.0 {
                    worst = worst.max(crate::em::cnorm(&(curlcurl - rhs)) / scale);
                }
            }
        }
    }
    Ok(worst)
}
