//! Boundary-integral solver for one small perfectly conducting body.
//!
//! The scattered field is represented as `v = ∇ × ∫_S g(x,t) J(t) dt` with
//! a tangential density `J`, which satisfies
//!
//! ```text
//! J(s)/2 + ∫_S ( ∇_s g(s,t) N_s·J(t) - J(t) ∂g(s,t)/∂N_s ) dt = -N_s × E₀(s).
//! ```
//!
//! Discretization is centroid collocation with three Cartesian unknowns per
//! face and the one-point rule per face. On a flat face both kernels are
//! annihilated by `N_s·(s - t) = 0` and `N_s·J = 0`, so the self-face block
//! is zero. After the solve each `J_f` is projected onto its face plane.

use log::debug;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::em::{cnorm, complexify, cross_rc, dot_rc, grad_green_unchecked, CMat3, ComplexVec3, WaveContext};
use crate::linalg::{assemble_blocks, solve_dense, CMatrix, MAX_CONDITION};
use crate::shape::{ShapeConstants, SurfaceMesh};
use crate::{Error, Result};

/// Face-centroid values of the surface density `J`.
#[derive(Debug, Clone)]
pub struct SurfaceCurrent {
    values: Vec<ComplexVec3>,
    areas: Vec<f64>,
}

impl SurfaceCurrent {
    pub fn new(values: Vec<ComplexVec3>, areas: Vec<f64>) -> Self {
        assert_eq!(values.len(), areas.len());
        Self { values, areas }
    }

    pub fn values(&self) -> &[ComplexVec3] {
        &self.values
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { values: self.values.iter().map(|v| v * factor).collect(), areas: self.areas.clone() }
    }

    /// Largest `|N·J| / |J|` over faces with nonzero `J`.
    pub fn tangential_defect(&self, mesh: &SurfaceMesh) -> f64 {
        self.values
            .iter()
            .zip(mesh.normals())
            .filter(|(j, _)| cnorm(j) > 0.0)
            .map(|(j, n)| dot_rc(n, j).norm() / cnorm(j))
            .fold(0.0, f64::max)
    }
}

/// `Q = ∫_S J(t) dt`.
pub fn moment_q(current: &SurfaceCurrent) -> ComplexVec3 {
    current.values.iter().zip(&current.areas).map(|(j, a)| j * Complex64::from(*a)).sum()
}

/// 3×3 block of `T` coupling collocation face `s` to source face `t`.
pub fn t_block(mesh: &SurfaceMesh, k: Complex64, s: usize, t: usize) -> CMat3 {
    if s == t {
        return CMat3::zeros();
    }
    let n = &mesh.normals()[s];
    let d = mesh.centroids()[s] - mesh.centroids()[t];
    let grad = grad_green_unchecked(k, &d, d.norm());
    let dn = dot_rc(n, &grad);
    let w = mesh.areas()[t];
    CMat3::from_fn(|i, j| {
        let v = grad[i] * n[j];
        (if i == j { v - dn } else { v }) * w
    })
}

/// Collocation matrix of the integral operator `T` (3F × 3F, unknowns
/// ordered face-major).
pub fn assemble_t(mesh: &SurfaceMesh, k: Complex64) -> CMatrix {
    assemble_blocks(mesh.face_count(), |s, t| t_block(mesh, k, s, t))
}

/// Solves `(I/2 + T) J = -N × E₀` and projects `J` onto the face planes.
pub fn solve_current(mesh: &SurfaceMesh, ctx: &WaveContext) -> Result<SurfaceCurrent> {
    let f = mesh.face_count();
    let mut m = assemble_t(mesh, ctx.k());
    for i in 0..3 * f {
        m[(i, i)] += Complex64::new(0.5, 0.0);
    }
    let rhs: Vec<Complex64> = mesh
        .centroids()
        .iter()
        .zip(mesh.normals())
        .flat_map(|(c, n)| {
            let v = -cross_rc(n, &ctx.plane_wave(c));
            [v[0], v[1], v[2]]
        })
        .collect();
    let sol = solve_dense(&m, &rhs, MAX_CONDITION).map_err(|e| match e {
        Error::IllConditioned { condition } => Error::Regime(format!(
            "boundary-integral system is near-singular (condition estimate {condition:.3e}); \
             ka may be near an interior resonance or the mesh is too coarse"
        )),
        other => other,
    })?;
    debug!("bie solve: {} faces, condition {:.3e}, residual {:.3e}", f, sol.condition, sol.residual);
    let values = (0..f)
        .map(|p| {
            let j = ComplexVec3::new(sol.x[3 * p], sol.x[3 * p + 1], sol.x[3 * p + 2]);
            let nrm = &mesh.normals()[p];
            j - complexify(nrm) * dot_rc(nrm, &j)
        })
        .collect();
    Ok(SurfaceCurrent::new(values, mesh.areas().to_vec()))
}

/// Correction data of the diagonal simplification `Γ = γ I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaData {
    /// `X_p = ∫_S Γ_pq(t) J_q(t) dt`.
    pub x: ComplexVec3,
    pub q: ComplexVec3,
    pub gamma: Complex64,
    /// `1 / (1 + γ)`.
    pub c_gamma: Complex64,
}

/// `X = ∫_S ∫_S ∇_s g(s,t) N_s·J(t) ds dt` (self-face pairs excluded) and
/// `γ = Σ conj(Q_p) X_p / Σ |Q_p|²`.
pub fn gamma_from_current(mesh: &SurfaceMesh, k: Complex64, current: &SurfaceCurrent) -> Result<GammaData> {
    let q = moment_q(current);
    let qn2: f64 = q.iter().map(|c| c.norm_sqr()).sum();
    if qn2 == 0.0 || !qn2.is_finite() {
        return Err(Error::DegenerateMoment);
    }
    let c = mesh.centroids();
    let n = mesh.normals();
    let w = mesh.areas();
    let f = mesh.face_count();
    let per_t: Vec<ComplexVec3> = (0..f)
        .into_par_iter()
        .map(|t| {
            let jt = &current.values[t];
            let mut acc = ComplexVec3::zeros();
            for s in 0..f {
                if s == t {
                    continue;
                }
                let d = c[s] - c[t];
                let grad = grad_green_unchecked(k, &d, d.norm());
                acc += grad * (dot_rc(&n[s], jt) * w[s]);
            }
            acc * Complex64::from(w[t])
        })
        .collect();
    let x: ComplexVec3 = per_t.iter().sum();
    let gamma = q.iter().zip(x.iter()).map(|(qp, xp)| qp.conj() * xp).sum::<Complex64>() / qn2;
    let one_plus = Complex64::new(1.0, 0.0) + gamma;
    if one_plus.norm() < 1e-12 {
        return Err(Error::SingularCorrection);
    }
    Ok(GammaData { x, q, gamma, c_gamma: one_plus.inv() })
}

/// Closed-form moment of a small perfectly conducting body:
/// `Q = -c_D a³ c_γ ∇×E₀`.
pub fn q_asymptotic_pec(c_d: f64, a: f64, c_gamma: Complex64, curl_e0: &ComplexVec3) -> ComplexVec3 {
    curl_e0 * (-c_gamma * c_d * a.powi(3))
}

/// One row of the boundary-integral validation table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BieDiagnostic {
    pub ka: f64,
    pub refinement: u32,
    pub a: f64,
    pub q_bie: ComplexVec3,
    pub q_asym: ComplexVec3,
    pub relative_error: f64,
    pub gamma: Complex64,
    pub c_gamma: Complex64,
    /// `|Q + X + c_D a³ ∇×E₀| / |c_D a³ ∇×E₀|`.
    pub consistency_residual: f64,
    pub tangential_defect: f64,
}

impl BieDiagnostic {
    pub const CSV_HEADER: &'static str =
        "ka,refinement,abs_q_bie,abs_q_asym,relative_error,gamma_re,gamma_im,c_gamma_re,c_gamma_im";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.ka,
            self.refinement,
            cnorm(&self.q_bie),
            cnorm(&self.q_asym),
            self.relative_error,
            self.gamma.re,
            self.gamma.im,
            self.c_gamma.re,
            self.c_gamma.im
        )
    }
}

/// Solves the boundary-integral problem for a particle centred at the
/// origin and compares its moment with the closed form.
pub fn validate_pec(mesh: &SurfaceMesh, refinement: u32, ctx: &WaveContext) -> Result<BieDiagnostic> {
    let current = solve_current(mesh, ctx)?;
    let gd = gamma_from_current(mesh, ctx.k(), &current)?;
    let shape = ShapeConstants::from_mesh(mesh);
    let a = mesh.size();
    let curl = ctx.plane_wave_curl(&crate::em::Point::zeros());
    let q_asym = q_asymptotic_pec(shape.c_d, a, gd.c_gamma, &curl);
    let relative_error = cnorm(&(gd.q - q_asym)) / cnorm(&q_asym);
    let target = curl * Complex64::from(shape.c_d * a.powi(3));
    let consistency_residual = cnorm(&(gd.q + gd.x + target)) / cnorm(&target);
    Ok(BieDiagnostic {
        ka: ctx.k().norm() * a,
        refinement,
        a,
        q_bie: gd.q,
        q_asym,
        relative_error,
        gamma: gd.gamma,
        c_gamma: gd.c_gamma,
        consistency_residual,
        tangential_defect: current.tangential_defect(mesh),
    })
}
