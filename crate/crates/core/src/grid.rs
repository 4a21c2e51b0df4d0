//! Axis-aligned domain and its partition into equal cubes.

use serde::{Deserialize, Serialize};

use crate::em::Point;
use crate::{Error, Result};

/// Axis-aligned box `Ω = corner + [0, extents]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub corner: [f64; 3],
    pub extents: [f64; 3],
}

impl DomainBox {
    pub fn new(corner: [f64; 3], extents: [f64; 3]) -> Result<Self> {
        if extents.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::config(format!("domain extents must be positive, got {extents:?}")));
        }
        Ok(Self { corner, extents })
    }

    pub fn unit_cube() -> Self {
        Self { corner: [0.0; 3], extents: [1.0; 3] }
    }

    pub fn volume(&self) -> f64 {
        self.extents.iter().product()
    }

    pub fn center(&self) -> Point {
        Point::from_fn(|i, _| self.corner[i] + 0.5 * self.extents[i])
    }

    pub fn contains(&self, x: &Point) -> bool {
        (0..3).all(|i| x[i] >= self.corner[i] && x[i] <= self.corner[i] + self.extents[i])
    }
}

/// Partition of a [`DomainBox`] into cubes of side `b`, indexed with `x`
/// varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeGrid {
    domain: DomainBox,
    side: f64,
    counts: [usize; 3],
}

impl CubeGrid {
    pub fn new(domain: DomainBox, side: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::config(format!("cube side must be positive, got {side}")));
        }
        let mut counts = [0usize; 3];
        for i in 0..3 {
            let n = domain.extents[i] / side;
            let rounded = n.round();
            if rounded < 1.0 || (n - rounded).abs() > 1e-9 * n.max(1.0) {
                return Err(Error::config(format!(
                    "cube side {side} does not divide domain extent {}",
                    domain.extents[i]
                )));
            }
            counts[i] = rounded as usize;
        }
        Ok(Self { domain, side, counts })
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.side.powi(3)
    }

    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        i + self.counts[0] * (j + self.counts[1] * l)
    }

    pub fn coords(&self, p: usize) -> [usize; 3] {
        let i = p % self.counts[0];
        let j = (p / self.counts[0]) % self.counts[1];
        let l = p / (self.counts[0] * self.counts[1]);
        [i, j, l]
    }

    /// Lower corner of cell `p`.
    pub fn cell_corner(&self, p: usize) -> Point {
        let c = self.coords(p);
        Point::from_fn(|a, _| self.domain.corner[a] + c[a] as f64 * self.side)
    }

    pub fn center(&self, p: usize) -> Point {
        self.cell_corner(p).add_scalar(0.5 * self.side)
    }

    pub fn centers(&self) -> Vec<Point> {
        (0..self.len()).map(|p| self.center(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_covers_domain() {
        let d = DomainBox::new([0.0, -1.0, 2.0], [1.0, 2.0, 0.5]).unwrap();
        let g = CubeGrid::new(d, 0.25).unwrap();
        assert_eq!(g.counts(), [4, 8, 2]);
        let total: f64 = (0..g.len()).map(|_| g.cell_volume()).sum();
        assert!((total - d.volume()).abs() <= 1e-12 * d.volume());
        for p in 0..g.len() {
            let c = g.coords(p);
            assert_eq!(g.index(c[0], c[1], c[2]), p);
            assert!(d.contains(&g.center(p)));
        }
        assert!(CubeGrid::new(d, 0.3).is_err());
    }
}
