//! Coupled dipole systems: assembly, solution and field evaluation.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::placement::{min_distance, ParticleCloud};
use crate::em::{cross_rc, double_curl_unchecked, grad_green_unchecked, CMat3, ComplexVec3, Point, WaveContext};
use crate::linalg::{
    assemble_blocks, gmres, solve_dense, vec_norm2, CMatrix, GmresOptions, LinearOperator, MAX_CONDITION,
};
use crate::{Error, Result};

/// Residual ceiling accepted from any solver.
const MAX_RESIDUAL: f64 = 1e-10;

/// Unknown count (`3M`) above which [`SolveMethod::Auto`] turns iterative.
const AUTO_DENSE_LIMIT: usize = 6000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "level", rename_all = "snake_case")]
pub enum SolutionLevel {
    /// One unknown per particle.
    Full,
    /// One unknown per cube, at the cube centers.
    Reduced { cubes: usize },
}

#[derive(Debug, Clone, Copy)]
pub enum SolveMethod {
    /// LU with partial pivoting.
    Dense,
    /// Matrix-free restarted GMRES.
    Iterative(GmresOptions),
    /// Dense up to 6000 unknowns, iterative beyond.
    Auto,
}

/// `A_j + Σ_{m≠j} K(x_j, x_m) P_m A_m = (∇ × E₀)(x_j)` for point scatterers
/// with polarizabilities `P_m`.
#[derive(Debug, Clone)]
pub struct DipoleSystem {
    k: Complex64,
    points: Vec<Point>,
    polarizabilities: Vec<CMat3>,
    rhs: Vec<ComplexVec3>,
    level: SolutionLevel,
    exclusion_radius: f64,
}

impl DipoleSystem {
    /// Right-hand side from the incident plane wave; rejects coincident
    /// points.
    pub fn new(
        ctx: &WaveContext,
        points: Vec<Point>,
        polarizabilities: Vec<CMat3>,
        level: SolutionLevel,
        exclusion_radius: f64,
    ) -> Result<Self> {
        if points.len() != polarizabilities.len() {
            return Err(Error::config("one polarizability per point is required"));
        }
        if min_distance(&points) == 0.0 {
            return Err(Error::config("coincident scatterer centers"));
        }
        let rhs = points.iter().map(|x| ctx.plane_wave_curl(x)).collect();
        Ok(Self { k: ctx.k(), points, polarizabilities, rhs, level, exclusion_radius })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn polarizabilities(&self) -> &[CMat3] {
        &self.polarizabilities
    }

    pub fn rhs(&self) -> &[ComplexVec3] {
        &self.rhs
    }

    pub fn level(&self) -> &SolutionLevel {
        &self.level
    }

    /// 3×3 block `(j, m)` of the system matrix.
    pub fn block(&self, j: usize, m: usize) -> CMat3 {
        if j == m {
            return CMat3::identity();
        }
        let d = self.points[j] - self.points[m];
        double_curl_unchecked(self.k, &d, d.norm()) * self.polarizabilities[m]
    }

    /// Dense `3M × 3M` matrix.
    pub fn matrix(&self) -> CMatrix {
        assemble_blocks(self.len(), |j, m| self.block(j, m))
    }

    pub fn rhs_flat(&self) -> Vec<Complex64> {
        flatten(&self.rhs)
    }

    pub fn solve(&self, method: SolveMethod) -> Result<CloudSolution> {
        let n = 3 * self.len();
        let method = match method {
            SolveMethod::Auto if n > AUTO_DENSE_LIMIT => SolveMethod::Iterative(GmresOptions::default()),
            SolveMethod::Auto => SolveMethod::Dense,
            m => m,
        };
        let b = self.rhs_flat();
        let (x, residual, condition, iterations) = if n == 0 {
            (Vec::new(), 0.0, None, 0)
        } else {
            match method {
                SolveMethod::Dense => {
                    let sol = solve_dense(&self.matrix(), &b, MAX_CONDITION).map_err(|e| match e {
                        Error::IllConditioned { condition } => Error::Regime(format!(
                            "coupled system is near-singular (condition estimate {condition:.3e}); \
                             the separation a << d << wavelength is probably violated"
                        )),
                        other => other,
                    })?;
                    (sol.x, sol.residual, Some(sol.condition), 0)
                }
                SolveMethod::Iterative(opts) => {
                    let sol = gmres(self, &b, opts)?;
                    (sol.x, sol.residual, None, sol.iterations)
                }
                SolveMethod::Auto => unreachable!(),
            }
        };
        if !(residual <= MAX_RESIDUAL) {
            return Err(Error::Numerical(format!("coupled system residual {residual:.3e} exceeds {MAX_RESIDUAL:e}")));
        }
        log::debug!("solved {} scatterers: residual {residual:.3e}, iterations {iterations}", self.len());
        let curls = unflatten(&x);
        let moments = curls.iter().zip(&self.polarizabilities).map(|(a, p)| -(p * a)).collect();
        Ok(CloudSolution {
            k: self.k,
            level: self.level.clone(),
            points: self.points.clone(),
            curls,
            moments,
            exclusion_radius: self.exclusion_radius,
            residual,
            condition,
            iterations,
        })
    }
}

impl LinearOperator for DipoleSystem {
    fn dim(&self) -> usize {
        3 * self.len()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let a = unflatten(x);
        let pa: Vec<ComplexVec3> = a.iter().zip(&self.polarizabilities).map(|(v, p)| p * v).collect();
        let y: Vec<ComplexVec3> = (0..self.len())
            .into_par_iter()
            .map(|j| {
                let mut acc = a[j];
                for (m, v) in pa.iter().enumerate() {
                    if m != j {
                        let d = self.points[j] - self.points[m];
                        acc += double_curl_unchecked(self.k, &d, d.norm()) * v;
                    }
                }
                acc
            })
            .collect();
        flatten(&y)
    }
}

fn flatten(v: &[ComplexVec3]) -> Vec<Complex64> {
    v.iter().flat_map(|c| [c[0], c[1], c[2]]).collect()
}

fn unflatten(x: &[Complex64]) -> Vec<ComplexVec3> {
    x.chunks_exact(3).map(|c| ComplexVec3::new(c[0], c[1], c[2])).collect()
}

/// Full system: one unknown per particle.
pub fn assemble_full(cloud: &ParticleCloud, ctx: &WaveContext) -> Result<DipoleSystem> {
    let points = cloud.particles().iter().map(|p| *p.center()).collect();
    let pols = cloud.particles().iter().map(|p| p.polarizability(ctx)).collect();
    DipoleSystem::new(ctx, points, pols, SolutionLevel::Full, 2.0 * cloud.config().a)
}

/// Reduced system on the cloud's cube partition: unknowns at the cube
/// centers, each cube weighted by `N(x_p) |Δ_p|`. Requires `b / d` at
/// least the configured ratio.
pub fn reduce_to_cubes(cloud: &ParticleCloud, ctx: &WaveContext) -> Result<DipoleSystem> {
    let cfg = cloud.config();
    let grid = cloud.grid();
    let ratio = grid.side() / cloud.d_min();
    if cloud.len() >= 2 && ratio < cfg.min_cube_ratio * (1.0 - 1e-9) {
        return Err(Error::Regime(format!("cube reduction needs b/d >= {}, got {ratio:.3}", cfg.min_cube_ratio)));
    }
    let points = grid.centers();
    let volume = grid.cell_volume();
    let pols = points.iter().map(|x| cfg.cube_polarizability(x, volume, ctx)).collect();
    DipoleSystem::new(ctx, points, pols, SolutionLevel::Reduced { cubes: grid.len() }, 2.0 * cfg.a)
}

/// Solved curls `A_m`, the moments `Q_m = -P_m A_m`, and field evaluation
/// `E = E₀ + Σ ∇g(x, x_m) × Q_m`.
#[derive(Debug, Clone)]
pub struct CloudSolution {
    k: Complex64,
    level: SolutionLevel,
    points: Vec<Point>,
    curls: Vec<ComplexVec3>,
    moments: Vec<ComplexVec3>,
    exclusion_radius: f64,
    /// `‖(I + K) A - A₀‖ / ‖A₀‖`.
    pub residual: f64,
    pub condition: Option<f64>,
    pub iterations: usize,
}

impl CloudSolution {
    pub fn level(&self) -> &SolutionLevel {
        &self.level
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// `A_m = (∇ × E_e)(x_m)`.
    pub fn curls(&self) -> &[ComplexVec3] {
        &self.curls
    }

    pub fn moments(&self) -> &[ComplexVec3] {
        &self.moments
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn field_skipping(&self, ctx: &WaveContext, x: &Point, skip: Option<usize>) -> ComplexVec3 {
        let mut e = ctx.plane_wave(x);
        for (m, (y, q)) in self.points.iter().zip(&self.moments).enumerate() {
            if Some(m) == skip {
                continue;
            }
            let d = x - y;
            e += grad_green_unchecked(self.k, &d, d.norm()).cross(q);
        }
        e
    }

    /// Radius around each source inside which fields are not evaluated.
    pub fn exclusion_radius(&self) -> f64 {
        self.exclusion_radius
    }

    /// True when `x` lies within the exclusion radius of some source.
    pub fn in_near_field(&self, x: &Point) -> bool {
        self.points.iter().any(|y| (x - y).norm() < self.exclusion_radius)
    }

    /// Total field at `x`; probes within the exclusion radius of a source
    /// are rejected.
    pub fn evaluate_field(&self, ctx: &WaveContext, x: &Point) -> Result<ComplexVec3> {
        if let Some(y) = self.points.iter().find(|y| (x - *y).norm() < self.exclusion_radius) {
            return Err(Error::config(format!(
                "probe {:?} lies within the near-field radius {:.3e} of the scatterer at {:?}",
                x.as_slice(),
                self.exclusion_radius,
                y.as_slice()
            )));
        }
        Ok(self.field_skipping(ctx, x, None))
    }

    /// [`Self::evaluate_field`] over many probes, in parallel.
    pub fn evaluate_fields(&self, ctx: &WaveContext, xs: &[Point]) -> Result<Vec<ComplexVec3>> {
        xs.par_iter().map(|x| self.evaluate_field(ctx, x)).collect()
    }

    /// Field acting on scatterer `j`: all terms except its own, at `x_j`.
    pub fn effective_field_at(&self, ctx: &WaveContext, j: usize) -> Result<ComplexVec3> {
        if j >= self.len() {
            return Err(Error::config(format!("scatterer index {j} out of range")));
        }
        Ok(self.field_skipping(ctx, &self.points[j], Some(j)))
    }

    /// Scattering amplitude in direction `β`:
    /// `(ik/4π) Σ β × Q_m exp(-ik β·x_m)`.
    pub fn far_field_amplitude(&self, beta: &Point) -> ComplexVec3 {
        let i = Complex64::i();
        let sum: ComplexVec3 = self
            .points
            .iter()
            .zip(&self.moments)
            .map(|(y, q)| cross_rc(beta, q) * (-i * self.k * beta.dot(y)).exp())
            .sum();
        sum * (i * self.k / (4.0 * std::f64::consts::PI))
    }

    /// Largest `|E|` over the probes.
    pub fn max_field_norm(fields: &[ComplexVec3]) -> f64 {
        fields.iter().map(|e| vec_norm2(e.as_slice())).fold(0.0, f64::max)
    }
}
