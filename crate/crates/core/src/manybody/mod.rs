//! Many small particles: placement by the density law, the coupled
//! system for the curls `A_m = (∇ × E_e)(x_m)`, its cube-reduced form, and
//! field evaluation.
//!
//! Every scatterer, a particle or a whole cube, enters as a point source
//! with a 3×3 polarizability `P_m`, `Q_m = -P_m A_m`. Since
//! `∇ × (∇g × Q) = (k² g I + ∇∇g) Q`, the system reads
//!
//! ```text
//! A_j + Σ_{m≠j} (k² g + ∇∇g)(x_j, x_m) P_m A_m = (∇ × E₀)(x_j).
//! ```

mod placement;
mod system;

use num_complex::Complex64;

use crate::em::{CMat3, Point, WaveContext};
use crate::grid::DomainBox;
use crate::particle::{check_kappa, ParticleKind};
use crate::profile::Profile;
use crate::shape::ShapeConstants;
use crate::{Error, Result};

pub use placement::{place_particles, ParticleCloud};
pub use system::{assemble_full, reduce_to_cubes, CloudSolution, DipoleSystem, SolutionLevel, SolveMethod};

/// Default lower bound on `b / d` for the cube reduction.
pub const DEFAULT_MIN_CUBE_RATIO: f64 = 5.0;

/// Particle type shared by the whole cloud.
#[derive(Debug, Clone, PartialEq)]
pub enum CloudKind {
    /// Perfectly conducting particles with correction factor `c_γ`.
    Pec { c_gamma: Complex64 },
    /// Impedance particles; `τ` of the shape unless overridden.
    Impedance { tau1_override: Option<CMat3> },
}

/// Physical description of a cloud of identical particles.
#[derive(Debug, Clone)]
pub struct CloudConfig {
    pub domain: DomainBox,
    /// Density `N(x) ≥ 0`.
    pub density: Profile<f64>,
    /// Impedance profile `h(x)` (unused for perfect conductors).
    pub impedance: Profile<Complex64>,
    pub a: f64,
    pub kappa: f64,
    pub kind: CloudKind,
    pub shape: ShapeConstants,
    /// Side `b` of the partition cubes.
    pub cube_side: f64,
    /// Required `b / d` for the cube reduction.
    pub min_cube_ratio: f64,
}

impl CloudConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn impedance(
        domain: DomainBox,
        density: Profile<f64>,
        impedance: Profile<Complex64>,
        a: f64,
        kappa: f64,
        shape: ShapeConstants,
        cube_side: f64,
    ) -> Self {
        Self {
            domain,
            density,
            impedance,
            a,
            kappa,
            kind: CloudKind::Impedance { tau1_override: None },
            shape,
            cube_side,
            min_cube_ratio: DEFAULT_MIN_CUBE_RATIO,
        }
    }

    pub fn pec(
        domain: DomainBox,
        density: Profile<f64>,
        a: f64,
        c_gamma: Complex64,
        shape: ShapeConstants,
        cube_side: f64,
    ) -> Self {
        Self {
            domain,
            density,
            impedance: Profile::constant(Complex64::new(0.0, 0.0)),
            a,
            kappa: 0.0,
            kind: CloudKind::Pec { c_gamma },
            shape,
            cube_side,
            min_cube_ratio: DEFAULT_MIN_CUBE_RATIO,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::config(format!("particle size must be positive, got {}", self.a)));
        }
        check_kappa(self.kappa)?;
        if !(self.min_cube_ratio > 0.0) {
            return Err(Error::config("min_cube_ratio must be positive"));
        }
        if let CloudKind::Pec { c_gamma } = self.kind {
            if !c_gamma.is_finite() {
                return Err(Error::config("c_gamma must be finite"));
            }
        }
        Ok(())
    }

    /// Exponent `e` in the counting law `#{x_m ∈ Δ} ≈ a^{-e} ∫_Δ N`.
    pub fn count_exponent(&self) -> f64 {
        match self.kind {
            CloudKind::Impedance { .. } => 2.0 - self.kappa,
            CloudKind::Pec { .. } => 3.0,
        }
    }

    /// `τ'`: the override when present, `τ` of the shape otherwise.
    pub fn tau_prime(&self) -> CMat3 {
        match &self.kind {
            CloudKind::Impedance { tau1_override: Some(t) } => *t,
            _ => self.shape.tau.map(Complex64::from),
        }
    }

    pub(crate) fn particle_kind_at(&self, x: &Point) -> ParticleKind {
        match &self.kind {
            CloudKind::Pec { c_gamma } => ParticleKind::Pec { c_d: self.shape.c_d, c_gamma: *c_gamma },
            CloudKind::Impedance { tau1_override } => ParticleKind::Impedance {
                h: self.impedance.at(x),
                kappa: self.kappa,
                c_s: self.shape.c_s,
                tau: self.shape.tau,
                tau1_override: *tau1_override,
            },
        }
    }

    /// Polarizability of a whole cube of volume `volume` centred at `x`:
    /// the particle polarizability with `a^{2-κ}` (or `a³`) replaced by
    /// `N(x) |Δ|`.
    pub fn cube_polarizability(&self, x: &Point, volume: f64, ctx: &WaveContext) -> CMat3 {
        let weight = self.density.at(x) * volume;
        match &self.kind {
            CloudKind::Pec { c_gamma } => CMat3::identity() * (c_gamma * (self.shape.c_d * weight)),
            CloudKind::Impedance { .. } => {
                let h = self.impedance.at(x);
                self.tau_prime() * (h * (self.shape.c_s * weight) / (Complex64::i() * ctx.omega() * ctx.mu()))
            }
        }
    }
}
