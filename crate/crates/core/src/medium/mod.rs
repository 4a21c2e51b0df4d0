//! The homogenized limit of dense particle clouds.
//!
//! On a cube partition of `Ω` the limiting equation
//! `E = E₀ - ∇ × ∫_Ω g(x, y) W(y) A(y) dy` is collocated at the cube
//! centers with unknowns `A_p`, where `W = (c₀ h N / iωμ) τ` for impedance
//! particles and `W = c_D c_γ N I` for perfect conductors. The strongly
//! singular self-cell integral is left out unless a local term `-c W_p A_p`
//! is requested.

mod effective;
mod residual;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::em::{double_curl_matrix, double_curl_unchecked, grad_green, CMat3, ComplexVec3, Point, WaveContext};
use crate::grid::CubeGrid;
use crate::linalg::{assemble_blocks, gmres, solve_dense, CMatrix, GmresOptions, LinearOperator, MAX_CONDITION};
use crate::manybody::{CloudConfig, CloudKind};
use crate::profile::Profile;
use crate::{Error, Result};

pub use effective::{
    c1, contrast, contrast_pec, design_h_at, design_h_for_mu, design_h_for_mu_at, design_h_for_n, permeability,
    permeability_pec, refraction_coefficient, refraction_coefficient_pec, sqrt_upper_branch, DesignReport,
};
pub use residual::curlcurl_residual;

/// Coefficient of the local term that makes the unknown the macroscopic
/// `∇ × E`: `∇×∇×∫gW = p.v.∫(k²g + ∇∇g)W + (2/3)W`.
pub const MACROSCOPIC_SELF_COEFFICIENT: f64 = 2.0 / 3.0;

/// Particle type of the limiting medium.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitKind {
    /// Weight `(c₀ h N / iωμ) τ'`.
    Impedance { c0: f64, tau: CMat3 },
    /// Weight `c_D c_γ N I`.
    Pec { c_d: f64, c_gamma: Complex64 },
}

impl LimitKind {
    /// The limit of a cloud, with `c₀ = c_S` of its shape.
    pub fn from_cloud(cfg: &CloudConfig) -> Self {
        match cfg.kind {
            CloudKind::Impedance { .. } => LimitKind::Impedance { c0: cfg.shape.c_s, tau: cfg.tau_prime() },
            CloudKind::Pec { c_gamma } => LimitKind::Pec { c_d: cfg.shape.c_d, c_gamma },
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LimitOptions {
    /// Coefficient `c` of the local term `-c W_p A_p`; `None` omits it.
    pub self_term: Option<f64>,
    /// Use GMRES instead of a dense factorization.
    pub iterative: Option<GmresOptions>,
}

/// Samples of `N` and `h` on a cube partition, and once solved, the
/// limiting field at the cube centers.
#[derive(Debug, Clone)]
pub struct MediumGrid {
    grid: CubeGrid,
    density: Vec<f64>,
    impedance: Vec<Complex64>,
    solution: Option<LimitSolution>,
}

#[derive(Debug, Clone)]
struct LimitSolution {
    k: Complex64,
    curls: Vec<ComplexVec3>,
    /// `Q_p = -W_p |Δ_p| A_p`.
    moments: Vec<ComplexVec3>,
    field: Vec<ComplexVec3>,
    residual: f64,
}

impl MediumGrid {
    /// Cell-center samples of `N` and `h`.
    pub fn sample(grid: CubeGrid, density: &Profile<f64>, impedance: &Profile<Complex64>) -> Result<Self> {
        let centers = grid.centers();
        let density: Vec<f64> = centers.iter().map(|x| density.at(x)).collect();
        let impedance: Vec<Complex64> = centers.iter().map(|x| impedance.at(x)).collect();
        Self::from_samples(grid, density, impedance)
    }

    pub fn from_samples(grid: CubeGrid, density: Vec<f64>, impedance: Vec<Complex64>) -> Result<Self> {
        if density.len() != grid.len() || impedance.len() != grid.len() {
            return Err(Error::config("sample count does not match the grid"));
        }
        if let Some(n) = density.iter().find(|n| !(**n >= 0.0 && n.is_finite())) {
            return Err(Error::config(format!("density must be finite and non-negative, got {n}")));
        }
        for h in &impedance {
            crate::particle::check_h(*h)?;
        }
        Ok(Self { grid, density, impedance, solution: None })
    }

    /// Grid and samples of a cloud configuration (same partition as its
    /// cube reduction).
    pub fn from_cloud(cfg: &CloudConfig) -> Result<Self> {
        Self::sample(CubeGrid::new(cfg.domain, cfg.cube_side)?, &cfg.density, &cfg.impedance)
    }

    pub fn grid(&self) -> &CubeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn impedance(&self) -> &[Complex64] {
        &self.impedance
    }

    /// `Σ |Δ_p|`.
    pub fn total_volume(&self) -> f64 {
        self.grid.cell_volume() * self.grid.len() as f64
    }

    /// Weight tensor `W_p |Δ_p|` of cell `p`.
    pub fn cell_weight(&self, p: usize, ctx: &WaveContext, kind: &LimitKind) -> CMat3 {
        let volume = self.grid.cell_volume();
        match kind {
            LimitKind::Impedance { c0, tau } => {
                let w = c0 * self.impedance[p] * self.density[p] * volume / (Complex64::i() * ctx.omega() * ctx.mu());
                tau * w
            }
            LimitKind::Pec { c_d, c_gamma } => CMat3::identity() * (c_gamma * c_d * self.density[p] * volume),
        }
    }

    /// Collocation matrix of the limiting equation.
    pub fn limit_matrix(&self, ctx: &WaveContext, kind: &LimitKind, opts: &LimitOptions) -> Result<CMatrix> {
        let centers = self.grid.centers();
        let weights: Vec<CMat3> = (0..self.len()).map(|p| self.cell_weight(p, ctx, kind)).collect();
        let volume = self.grid.cell_volume();
        let k = ctx.k();
        Ok(assemble_blocks(self.len(), |j, m| {
            if j == m {
                return match opts.self_term {
                    Some(c) => CMat3::identity() + weights[m] * Complex64::from(c / volume),
                    None => CMat3::identity(),
                };
            }
            double_curl_matrix(k, &centers[j], &centers[m]).expect("distinct cell centers") * weights[m]
        }))
    }

    /// Solves the limiting equation and reconstructs `E` at the centers.
    pub fn solve_limit_ie(mut self, ctx: &WaveContext, kind: &LimitKind, opts: &LimitOptions) -> Result<Self> {
        let centers = self.grid.centers();
        let rhs: Vec<Complex64> = centers
            .iter()
            .flat_map(|x| {
                let v = ctx.plane_wave_curl(x);
                [v[0], v[1], v[2]]
            })
            .collect();
        let (x, residual) = match opts.iterative {
            Some(g) => {
                let op = LimitOperator {
                    k: ctx.k(),
                    centers: centers.clone(),
                    weights: (0..self.len()).map(|p| self.cell_weight(p, ctx, kind)).collect(),
                    self_scale: opts.self_term.map(|c| c / self.grid.cell_volume()),
                };
                let s = gmres(&op, &rhs, g)?;
                (s.x, s.residual)
            }
            None => {
                let matrix = self.limit_matrix(ctx, kind, opts)?;
                let s = solve_dense(&matrix, &rhs, MAX_CONDITION).map_err(|e| match e {
                    Error::IllConditioned { condition } => Error::Regime(format!(
                        "limiting collocation matrix is near-singular (condition estimate {condition:.3e})"
                    )),
                    other => other,
                })?;
                (s.x, s.residual)
            }
        };
        let curls: Vec<ComplexVec3> = x.chunks_exact(3).map(|c| ComplexVec3::new(c[0], c[1], c[2])).collect();
        let moments: Vec<ComplexVec3> = (0..self.len()).map(|p| -(self.cell_weight(p, ctx, kind) * curls[p])).collect();
        let k = ctx.k();
        let field = (0..self.len())
            .into_par_iter()
            .map(|p| {
                let mut e = ctx.plane_wave(&centers[p]);
                for (m, q) in moments.iter().enumerate() {
                    if m != p {
                        e += grad_green(k, &centers[p], &centers[m]).expect("distinct cell centers").cross(q);
                    }
                }
                e
            })
            .collect();
        self.solution = Some(LimitSolution { k, curls, moments, field, residual });
        Ok(self)
    }

    pub fn is_solved(&self) -> bool {
        self.solution.is_some()
    }

    fn solved(&self) -> Result<&LimitSolution> {
        self.solution.as_ref().ok_or_else(|| Error::config("limiting equation has not been solved"))
    }

    /// `E` at the cell centers.
    pub fn field(&self) -> Result<&[ComplexVec3]> {
        Ok(&self.solved()?.field)
    }

    /// `A_p` at the cell centers.
    pub fn curls(&self) -> Result<&[ComplexVec3]> {
        Ok(&self.solved()?.curls)
    }

    pub fn residual(&self) -> Result<f64> {
        Ok(self.solved()?.residual)
    }

    /// `E(x)` by the same quadrature; `x` must not coincide with a center.
    pub fn evaluate_field(&self, ctx: &WaveContext, x: &Point) -> Result<ComplexVec3> {
        let s = self.solved()?;
        let mut e = ctx.plane_wave(x);
        for (c, q) in self.grid.centers().iter().zip(&s.moments) {
            e += grad_green(s.k, x, c)?.cross(q);
        }
        Ok(e)
    }

    pub fn evaluate_fields(&self, ctx: &WaveContext, xs: &[Point]) -> Result<Vec<ComplexVec3>> {
        xs.par_iter().map(|x| self.evaluate_field(ctx, x)).collect()
    }

    /// Pointwise `n` and `μ_eff` over the cells.
    pub fn effective_medium(&self, ctx: &WaveContext, kind: &LimitKind) -> Result<EffectiveMedium> {
        let mut out = EffectiveMedium { n: Vec::new(), mu_eff: Vec::new(), c1: Vec::new() };
        for p in 0..self.len() {
            let (h, dens) = (self.impedance[p], self.density[p]);
            let (n, mu, c) = match kind {
                LimitKind::Impedance { c0, .. } => (
                    refraction_coefficient(h, dens, ctx, *c0)?,
                    permeability(h, dens, ctx, *c0)?,
                    c1(dens, ctx, *c0).re,
                ),
                LimitKind::Pec { c_d, c_gamma } => (
                    refraction_coefficient_pec(*c_d, *c_gamma, dens)?,
                    permeability_pec(*c_d, *c_gamma, dens, ctx)?,
                    (c_gamma * c_d * dens).re,
                ),
            };
            out.n.push(n);
            out.mu_eff.push(mu);
            out.c1.push(c);
        }
        Ok(out)
    }
}

/// The collocation matrix applied without forming it.
struct LimitOperator {
    k: Complex64,
    centers: Vec<Point>,
    weights: Vec<CMat3>,
    self_scale: Option<f64>,
}

impl LinearOperator for LimitOperator {
    fn dim(&self) -> usize {
        3 * self.centers.len()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let a: Vec<ComplexVec3> = x.chunks_exact(3).map(|c| ComplexVec3::new(c[0], c[1], c[2])).collect();
        let wa: Vec<ComplexVec3> = a.iter().zip(&self.weights).map(|(v, w)| w * v).collect();
        let y: Vec<ComplexVec3> = (0..a.len())
            .into_par_iter()
            .map(|j| {
                let mut acc = a[j];
                if let Some(c) = self.self_scale {
                    acc += wa[j] * Complex64::from(c);
                }
                for (m, v) in wa.iter().enumerate() {
                    if m != j {
                        let d = self.centers[j] - self.centers[m];
                        acc += double_curl_unchecked(self.k, &d, d.norm()) * v;
                    }
                }
                acc
            })
            .collect();
        y.iter().flat_map(|c| [c[0], c[1], c[2]]).collect()
    }
}

/// Effective refraction coefficient and permeability per cell.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveMedium {
    pub n: Vec<Complex64>,
    pub mu_eff: Vec<Complex64>,
    /// `2c₀N/(3ωμ)` (impedance) or `Re(c_D c_γ N)` (perfect conductors).
    pub c1: Vec<f64>,
}
