//! Triangulated particle surfaces and the shape constants derived from them.
//!
//! All surface integrals use the one-point (centroid) rule per flat face;
//! accuracy is controlled by mesh refinement.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{self, Write};

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::em::{grad_green_unchecked, Point};
use crate::{Error, Result};

/// Largest accepted subdivision level (20·4⁸ ≈ 1.3M faces).
pub const MAX_REFINEMENT: u32 = 8;

/// Closed, outward-oriented triangulated surface.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    vertices: Vec<Point>,
    faces: Vec<[usize; 3]>,
    normals: Vec<Point>,
    areas: Vec<f64>,
    centroids: Vec<Point>,
    volume: f64,
    size: f64,
}

impl SurfaceMesh {
    /// Builds a mesh and checks that it is closed and consistently oriented
    /// with outward normals.
    pub fn new(vertices: Vec<Point>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::config("mesh has no faces"));
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * faces.len());
        for f in &faces {
            if f.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::config("face references a missing vertex"));
            }
            for e in 0..3 {
                *directed.entry((f[e], f[(e + 1) % 3])).or_default() += 1;
            }
        }
        for (&(u, v), &n) in &directed {
            if n != 1 || directed.get(&(v, u)) != Some(&1) {
                return Err(Error::config(format!(
                    "surface is not closed and consistently oriented at edge ({u}, {v})"
                )));
            }
        }

        let mut normals = Vec::with_capacity(faces.len());
        let mut areas = Vec::with_capacity(faces.len());
        let mut centroids = Vec::with_capacity(faces.len());
        let mut volume = 0.0;
        for f in &faces {
            let [p0, p1, p2] = [vertices[f[0]], vertices[f[1]], vertices[f[2]]];
            let n = (p1 - p0).cross(&(p2 - p0));
            let twice_area = n.norm();
            if twice_area == 0.0 {
                return Err(Error::config("degenerate face"));
            }
            normals.push(n / twice_area);
            areas.push(0.5 * twice_area);
            centroids.push((p0 + p1 + p2) / 3.0);
            volume += p0.dot(&p1.cross(&p2)) / 6.0;
        }
        if !(volume > 0.0) {
            return Err(Error::config("mesh encloses no volume or is oriented inward"));
        }
        let size = 0.5 * diameter(&vertices);
        Ok(Self { vertices, faces, normals, areas, centroids, volume, size })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn normals(&self) -> &[Point] {
        &self.normals
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn centroids(&self) -> &[Point] {
        &self.centroids
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn surface_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Characteristic size `a`, half of the largest vertex distance.
    pub fn size(&self) -> f64 {
        self.size
    }

    /// `Σ_f |f| N_f`, which vanishes for a closed surface.
    pub fn weighted_normal_sum(&self) -> Point {
        self.normals.iter().zip(&self.areas).map(|(n, a)| n * *a).sum()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.vertices.iter().map(|v| v * factor).collect(), self.faces.clone())
    }

    /// Writes the mesh in OFF format.
    pub fn write_off<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "OFF")?;
        writeln!(w, "{} {} 0", self.vertices.len(), self.faces.len())?;
        for v in &self.vertices {
            writeln!(w, "{:e} {:e} {:e}", v[0], v[1], v[2])?;
        }
        for f in &self.faces {
            writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
        }
        Ok(())
    }
}

/// Largest pairwise distance. Vertices are visited by decreasing distance
/// from the centroid so that pairs which cannot beat the current best are
/// skipped.
fn diameter(vertices: &[Point]) -> f64 {
    let c: Point = vertices.iter().sum::<Point>() / vertices.len() as f64;
    let mut order: Vec<(f64, usize)> = vertices.iter().enumerate().map(|(i, v)| ((v - c).norm(), i)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut best2 = 0.0f64;
    for (ii, &(ri, i)) in order.iter().enumerate() {
        if 2.0 * ri <= best2.sqrt() {
            break;
        }
        for &(rj, j) in &order[ii + 1..] {
            if ri + rj <= best2.sqrt() {
                break;
            }
            best2 = best2.max((vertices[i] - vertices[j]).norm_squared());
        }
    }
    best2.sqrt()
}

fn unit_icosphere(refinement: u32) -> Result<(Vec<Point>, Vec<[usize; 3]>)> {
    if refinement > MAX_REFINEMENT {
        return Err(Error::config(format!("refinement {refinement} exceeds the limit {MAX_REFINEMENT}")));
    }
    // Icosahedron with vertices at both poles; it is centrally symmetric,
    // so the mesh diameter equals the sphere diameter at every level.
    let z = 1.0 / 5f64.sqrt();
    let rho = 2.0 * z;
    let mut vertices = vec![Point::z()];
    for i in 0..5 {
        let t = 2.0 * PI * i as f64 / 5.0;
        vertices.push(Point::new(rho * t.cos(), rho * t.sin(), z));
    }
    for i in 0..5 {
        let t = 2.0 * PI * (i as f64 + 0.5) / 5.0;
        vertices.push(Point::new(rho * t.cos(), rho * t.sin(), -z));
    }
    vertices.push(-Point::z());

    let mut faces = Vec::with_capacity(20);
    for i in 0..5 {
        let (u0, u1) = (1 + i, 1 + (i + 1) % 5);
        let (l0, l1) = (6 + i, 6 + (i + 1) % 5);
        faces.push([0, u0, u1]);
        faces.push([u0, l0, u1]);
        faces.push([u1, l0, l1]);
        faces.push([11, l1, l0]);
    }
    for f in faces.iter_mut() {
        let [a, b, c] = [vertices[f[0]], vertices[f[1]], vertices[f[2]]];
        if (b - a).cross(&(c - a)).dot(&(a + b + c)) < 0.0 {
            f.swap(1, 2);
        }
    }

    for _ in 0..refinement {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(4 * faces.len());
        for f in &faces {
            let mut mid = [0usize; 3];
            for e in 0..3 {
                let (u, v) = (f[e], f[(e + 1) % 3]);
                let key = (u.min(v), u.max(v));
                mid[e] = *midpoint.entry(key).or_insert_with(|| {
                    vertices.push((vertices[u] + vertices[v]).normalize());
                    vertices.len() - 1
                });
            }
            next.push([f[0], mid[0], mid[2]]);
            next.push([mid[0], f[1], mid[1]]);
            next.push([mid[2], mid[1], f[2]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        faces = next;
    }
    Ok((vertices, faces))
}

/// Geodesic sphere of radius `a` centred at the origin, `20·4^refinement` faces.
pub fn make_icosphere(a: f64, refinement: u32) -> Result<SurfaceMesh> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::config(format!("sphere radius must be positive, got {a}")));
    }
    let (v, f) = unit_icosphere(refinement)?;
    SurfaceMesh::new(v.into_iter().map(|p| p * a).collect(), f)
}

/// Icosphere mapped onto the ellipsoid with the given semi-axes.
pub fn make_ellipsoid(semi_axes: [f64; 3], refinement: u32) -> Result<SurfaceMesh> {
    if semi_axes.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::config(format!("semi-axes must be positive, got {semi_axes:?}")));
    }
    let (v, f) = unit_icosphere(refinement)?;
    SurfaceMesh::new(
        v.into_iter().map(|p| Point::new(p[0] * semi_axes[0], p[1] * semi_axes[1], p[2] * semi_axes[2])).collect(),
        f,
    )
}

/// `τ = I - (1/|S|) ∫_S N Nᵀ dt`.
pub fn tau_tensor(mesh: &SurfaceMesh) -> Matrix3<f64> {
    let b: Matrix3<f64> = mesh.normals().iter().zip(mesh.areas()).map(|(n, a)| n * n.transpose() * *a).sum();
    let b = b / mesh.surface_area();
    // Symmetrize away any summation-order asymmetry.
    Matrix3::identity() - (b + b.transpose()) * 0.5
}

/// Geometric constants of one particle shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeConstants {
    pub surface_area: f64,
    pub volume: f64,
    /// `|D| / a³`.
    pub c_d: f64,
    /// `|S| / a²`.
    pub c_s: f64,
    pub tau: Matrix3<f64>,
}

impl ShapeConstants {
    pub fn from_mesh(mesh: &SurfaceMesh) -> Self {
        let a = mesh.size();
        Self {
            surface_area: mesh.surface_area(),
            volume: mesh.volume(),
            c_d: mesh.volume() / a.powi(3),
            c_s: mesh.surface_area() / (a * a),
            tau: tau_tensor(mesh),
        }
    }

    /// Exact constants of a ball: `c_D = 4π/3`, `c_S = 4π`, `τ = (2/3) I`.
    pub fn ball(radius: f64) -> Self {
        Self {
            surface_area: 4.0 * PI * radius * radius,
            volume: 4.0 * PI / 3.0 * radius.powi(3),
            c_d: 4.0 * PI / 3.0,
            c_s: 4.0 * PI,
            tau: Matrix3::identity() * (2.0 / 3.0),
        }
    }

    /// Sorted eigenvalues of `τ`.
    pub fn tau_eigenvalues(&self) -> [f64; 3] {
        let mut e: Vec<f64> = self.tau.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        [e[0], e[1], e[2]]
    }
}

/// Face-averaged value of `-∫_S ∂g(s,t)/∂N_s ds` over all centroids `t`,
/// excluding the self face. Tends to 1/2 for small bodies.
pub fn half_identity_check(mesh: &SurfaceMesh, k: Complex64) -> Complex64 {
    let c = mesh.centroids();
    let n = mesh.normals();
    let w = mesh.areas();
    let per_target: Vec<Complex64> = (0..c.len())
        .into_par_iter()
        .map(|t| {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..c.len() {
                if s == t {
                    continue;
                }
                let d = c[s] - c[t];
                let grad = grad_green_unchecked(k, &d, d.norm());
                let dn = grad[0] * n[s][0] + grad[1] * n[s][1] + grad[2] * n[s][2];
                acc -= dn * w[s];
            }
            acc
        })
        .collect();
    per_target.iter().sum::<Complex64>() / c.len() as f64
}
