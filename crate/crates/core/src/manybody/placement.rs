//! Deterministic placement of particles by the density law.

use rayon::prelude::*;

use super::CloudConfig;
use crate::em::{Point, WaveContext};
use crate::grid::CubeGrid;
use crate::particle::{validity_report, SmallParticle, ValidityReport, ValidityThresholds};
use crate::{Error, Result};

/// Particles of one cloud together with the cube partition used to place
/// them.
#[derive(Debug, Clone)]
pub struct ParticleCloud {
    config: CloudConfig,
    grid: CubeGrid,
    particles: Vec<SmallParticle>,
    cube_of: Vec<usize>,
    d_min: f64,
}

impl ParticleCloud {
    /// Builds a cloud from explicit particles; each is assigned to the
    /// cube of the configured partition containing it.
    pub fn from_particles(config: CloudConfig, particles: Vec<SmallParticle>) -> Result<Self> {
        config.validate()?;
        let grid = CubeGrid::new(config.domain, config.cube_side)?;
        let cube_of = particles.iter().map(|p| locate(&grid, p.center())).collect();
        let centers: Vec<Point> = particles.iter().map(|p| *p.center()).collect();
        let d_min = min_distance(&centers);
        if d_min == 0.0 {
            return Err(Error::config("two particles share a center"));
        }
        Ok(Self { config, grid, particles, cube_of, d_min })
    }

    pub fn config(&self) -> &CloudConfig {
        &self.config
    }

    pub fn grid(&self) -> &CubeGrid {
        &self.grid
    }

    pub fn particles(&self) -> &[SmallParticle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Cube index of every particle.
    pub fn cube_of(&self) -> &[usize] {
        &self.cube_of
    }

    /// Smallest pairwise center distance; infinite for fewer than two
    /// particles.
    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    /// Particle counts per cube.
    pub fn counts_per_cube(&self) -> Vec<usize> {
        let mut c = vec![0; self.grid.len()];
        for &p in &self.cube_of {
            c[p] += 1;
        }
        c
    }

    pub fn validity_report(&self, ctx: &WaveContext, thresholds: ValidityThresholds) -> Result<ValidityReport> {
        validity_report(self.config.a, ctx, self.d_min, thresholds)
    }
}

fn locate(grid: &CubeGrid, x: &Point) -> usize {
    let c = grid.domain().corner;
    let n = grid.counts();
    let idx: Vec<usize> =
        (0..3).map(|i| (((x[i] - c[i]) / grid.side()).floor().max(0.0) as usize).min(n[i] - 1)).collect();
    grid.index(idx[0], idx[1], idx[2])
}

/// Smallest pairwise distance by direct enumeration.
pub(crate) fn min_distance(points: &[Point]) -> f64 {
    (0..points.len())
        .into_par_iter()
        .map(|i| points[i + 1..].iter().map(|q| (points[i] - q).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min)
}

/// Rounds non-negative quotas to integers summing to `round(Σ n_p)`;
/// leftovers go to the largest fractional parts, lower index first on ties.
pub(crate) fn largest_remainder(quotas: &[f64]) -> Vec<usize> {
    let total = quotas.iter().sum::<f64>().round() as usize;
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&i, &j| {
        let (fi, fj) = (quotas[i] - quotas[i].floor(), quotas[j] - quotas[j].floor());
        fj.total_cmp(&fi).then(i.cmp(&j))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Smallest `s` with `s³ ≥ n`.
fn lattice_side(n: usize) -> usize {
    let mut s = (n as f64).cbrt().floor() as usize;
    while s * s * s < n {
        s += 1;
    }
    s.max(1)
}

/// Partitions the domain into cubes of side `b`, assigns each cube
/// `N(x_p) b³ / a^e` particles (largest-remainder rounding) and places them
/// on a regular sub-lattice of the cube.
pub fn place_particles(config: &CloudConfig) -> Result<ParticleCloud> {
    config.validate()?;
    let grid = CubeGrid::new(config.domain, config.cube_side)?;
    let b = grid.side();
    let scale = grid.cell_volume() / config.a.powf(config.count_exponent());
    let mut quotas = Vec::with_capacity(grid.len());
    for p in 0..grid.len() {
        let x = grid.center(p);
        let n = config.density.at(&x);
        if !(n >= 0.0 && n.is_finite()) {
            return Err(Error::config(format!(
                "density must be finite and non-negative, got {n} at {:?}",
                x.as_slice()
            )));
        }
        quotas.push(n * scale);
    }
    let counts = largest_remainder(&quotas);

    let mut particles = Vec::new();
    let mut cube_of = Vec::new();
    for (p, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let s = lattice_side(count);
        let spacing = b / s as f64;
        if spacing <= 2.0 * config.a {
            return Err(Error::Packing(format!(
                "cube {p} needs {count} particles; lattice spacing {spacing:.3e} is not larger than 2a = {:.3e}",
                2.0 * config.a
            )));
        }
        let corner = grid.cell_corner(p);
        let sites = s * s * s;
        for j in 0..count {
            let site = j * sites / count;
            let (i0, i1, i2) = (site % s, (site / s) % s, site / (s * s));
            let x = corner + Point::new(i0 as f64 + 0.5, i1 as f64 + 0.5, i2 as f64 + 0.5) * spacing;
            particles.push(SmallParticle::new(x, config.a, config.particle_kind_at(&x))?);
            cube_of.push(p);
        }
    }
    let centers: Vec<Point> = particles.iter().map(|q| *q.center()).collect();
    let d_min = min_distance(&centers);
    log::debug!("placed {} particles in {} cubes, d_min = {d_min:.3e}", particles.len(), grid.len());
    Ok(ParticleCloud { config: config.clone(), grid, particles, cube_of, d_min })
}
