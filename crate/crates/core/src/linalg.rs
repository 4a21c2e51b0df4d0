//! Dense and iterative solvers for the complex systems assembled by the
//! boundary-integral and many-body modules.
//!
//! Dense factorizations run through `faer` with sequential kernels, so the
//! results are bit-identical whatever the size of the rayon pool.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Col, Mat};
use log::debug;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::em::CMat3;
use crate::{Error, Result};

/// Complex dense matrix.
pub type CMatrix = Mat<Complex64>;

/// Default condition-number ceiling for dense solves.
pub const MAX_CONDITION: f64 = 1e12;

fn norm1_cols(m: &CMatrix) -> f64 {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn vec_norm1(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).sum()
}

pub(crate) fn vec_norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Block columns evaluated per parallel batch during assembly.
const ASSEMBLY_BATCH: usize = 32;

/// Builds a `3n × 3n` matrix from its `3 × 3` blocks. Block columns are
/// evaluated in parallel batches and copied in, so peak memory stays close
/// to one matrix.
pub(crate) fn assemble_blocks<F>(blocks: usize, block: F) -> CMatrix
where
    F: Fn(usize, usize) -> CMat3 + Sync,
{
    let n = 3 * blocks;
    let mut m = Mat::<Complex64>::zeros(n, n);
    for start in (0..blocks).step_by(ASSEMBLY_BATCH) {
        let end = (start + ASSEMBLY_BATCH).min(blocks);
        let columns: Vec<Vec<Complex64>> = (start..end)
            .into_par_iter()
            .map(|cb| {
                let mut col = vec![Complex64::new(0.0, 0.0); 3 * n];
                for rb in 0..blocks {
                    let b = block(rb, cb);
                    for j in 0..3 {
                        for i in 0..3 {
                            col[j * n + 3 * rb + i] = b[(i, j)];
                        }
                    }
                }
                col
            })
            .collect();
        for (offset, col) in columns.iter().enumerate() {
            let cb = start + offset;
            for j in 0..3 {
                for i in 0..n {
                    m[(i, 3 * cb + j)] = col[j * n + i];
                }
            }
        }
    }
    m
}

/// LU factorization with partial pivoting.
pub struct DenseLu {
    lu: PartialPivLu<Complex64>,
    norm1: f64,
    dim: usize,
    zero_pivot: bool,
}

impl DenseLu {
    pub fn new(matrix: &CMatrix) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "matrix must be square");
        let lu = matrix.partial_piv_lu();
        let u = lu.U();
        let zero_pivot = (0..matrix.nrows()).any(|i| {
            let p = u[(i, i)];
            p == Complex64::new(0.0, 0.0) || !p.is_finite()
        });
        Self { lu, norm1: norm1_cols(matrix), dim: matrix.nrows(), zero_pivot }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let b = Col::from_fn(self.dim, |i| rhs[i]);
        let x = self.lu.solve(&b);
        (0..self.dim).map(|i| x[i]).collect()
    }

    fn solve_adjoint(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let b = Col::from_fn(self.dim, |i| rhs[i]);
        let x = self.lu.solve_adjoint(&b);
        (0..self.dim).map(|i| x[i]).collect()
    }

    /// 1-norm condition estimate `‖A‖₁ · est(‖A⁻¹‖₁)` (Hager–Higham).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.dim;
        if n == 0 {
            return 1.0;
        }
        if self.zero_pivot {
            return f64::INFINITY;
        }
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        for iter in 0..5 {
            let y = self.solve(&x);
            let ny = vec_norm1(&y);
            if !ny.is_finite() {
                return f64::INFINITY;
            }
            if iter > 0 && ny <= est {
                break;
            }
            est = ny;
            let xi: Vec<Complex64> =
                y.iter().map(|c| if c.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { c / c.norm() }).collect();
            let z = self.solve_adjoint(&xi);
            let (j, zmax) =
                z.iter()
                    .enumerate()
                    .map(|(i, c)| (i, c.norm()))
                    .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(zi, xi)| (zi.conj() * xi).re).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![Complex64::new(0.0, 0.0); n];
            x[j] = Complex64::new(1.0, 0.0);
        }
        self.norm1 * est
    }
}

/// Outcome of a checked dense solve.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    pub x: Vec<Complex64>,
    pub condition: f64,
    /// `‖Ax - b‖₂ / ‖b‖₂`.
    pub residual: f64,
}

pub(crate) fn matvec(m: &CMatrix, x: &[Complex64]) -> Vec<Complex64> {
    let xc = Col::from_fn(x.len(), |i| x[i]);
    let y = m * &xc;
    (0..m.nrows()).map(|i| y[i]).collect()
}

pub(crate) fn relative_residual(m: &CMatrix, x: &[Complex64], b: &[Complex64]) -> f64 {
    let ax = matvec(m, x);
    let r: Vec<Complex64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let nb = vec_norm2(b);
    if nb == 0.0 {
        vec_norm2(&r)
    } else {
        vec_norm2(&r) / nb
    }
}

/// Factorizes, rejects systems whose condition estimate exceeds
/// `max_condition`, solves, and reports the relative residual.
pub fn solve_dense(m: &CMatrix, b: &[Complex64], max_condition: f64) -> Result<DenseSolution> {
    let lu = DenseLu::new(m);
    let condition = lu.condition_estimate();
    debug!("dense solve: n = {}, condition estimate {condition:.3e}", lu.dim());
    if !(condition <= max_condition) {
        return Err(Error::IllConditioned { condition });
    }
    let x = lu.solve(b);
    let residual = relative_residual(m, &x, b);
    Ok(DenseSolution { x, condition, residual })
}

/// A square linear operator applied without forming its matrix.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
}

impl LinearOperator for CMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        matvec(self, x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub tolerance: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { tolerance: 1e-12, restart: 60, max_iterations: 600 }
    }
}

#[derive(Debug, Clone)]
pub struct GmresSolution {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    pub residual: f64,
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(p, q)| p.conj() * q).sum()
}

/// Restarted GMRES with modified Gram–Schmidt and Givens rotations,
/// unpreconditioned, starting from zero.
pub fn gmres<A: LinearOperator + ?Sized>(op: &A, b: &[Complex64], opts: GmresOptions) -> Result<GmresSolution> {
    let n = op.dim();
    let zero = Complex64::new(0.0, 0.0);
    let nb = vec_norm2(b);
    let mut x = vec![zero; n];
    if nb == 0.0 {
        return Ok(GmresSolution { x, iterations: 0, residual: 0.0 });
    }
    let m = opts.restart.max(1);
    let mut iterations = 0;
    loop {
        let ax = op.apply(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = vec_norm2(&r);
        if beta / nb <= opts.tolerance {
            return Ok(GmresSolution { x, iterations, residual: beta / nb });
        }
        if iterations >= opts.max_iterations {
            return Err(Error::Numerical(format!(
                "GMRES did not converge in {iterations} iterations (residual {:.3e})",
                beta / nb
            )));
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|c| c / beta).collect()];
        let mut hess: Vec<Vec<Complex64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<Complex64> = Vec::new();
        let mut g = vec![Complex64::from(beta)];
        let mut inner = 0;
        while inner < m && iterations < opts.max_iterations {
            let mut w = op.apply(&basis[inner]);
            let mut h = vec![zero; inner + 2];
            for (i, v) in basis.iter().enumerate() {
                h[i] = dotc(v, &w);
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= h[i] * vk;
                }
            }
            let hn = vec_norm2(&w);
            h[inner + 1] = Complex64::from(hn);
            for i in 0..inner {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i].conj() * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let (a, bb) = (h[inner], h[inner + 1]);
            let denom = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if a.norm() == 0.0 {
                (0.0, Complex64::new(1.0, 0.0))
            } else {
                let phase = a / a.norm();
                (a.norm() / denom, phase * bb.conj() / denom)
            };
            h[inner] = c * a + s * bb;
            h[inner + 1] = zero;
            cs.push(c);
            sn.push(s);
            let gi = g[inner];
            g.push(-s.conj() * gi);
            g[inner] = c * gi;
            hess.push(h);
            iterations += 1;
            inner += 1;
            let done = g[inner].norm() / nb <= opts.tolerance || hn == 0.0;
            if !done {
                basis.push(w.iter().map(|c| c / hn).collect());
            }
            if done {
                break;
            }
        }
        // Back substitution on the triangular least-squares system.
        let mut y = vec![zero; inner];
        for i in (0..inner).rev() {
            let mut s = g[i];
            for j in i + 1..inner {
                s -= hess[j][i] * y[j];
            }
            y[i] = s / hess[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xk, vk) in x.iter_mut().zip(&basis[j]) {
                *xk += yj * vk;
            }
        }
    }
}
