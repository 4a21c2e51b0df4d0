//! Comma-separated output tables. Complex values are written as Re/Im
//! column pairs and every float in round-trip exponent form.

use std::io::Write;

use num_complex::Complex64;

use crate::em::{ComplexVec3, Point};
use crate::manybody::ParticleCloud;
use crate::medium::{EffectiveMedium, MediumGrid};
use crate::particle::ParticleKind;
use crate::{Error, Result};

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn push_complex(row: &mut Vec<String>, z: Complex64) {
    row.push(num(z.re));
    row.push(num(z.im));
}

fn push_vec(row: &mut Vec<String>, v: &ComplexVec3) {
    for c in v.iter() {
        push_complex(row, *c);
    }
}

fn push_point(row: &mut Vec<String>, x: &Point) {
    row.extend(x.iter().map(|c| num(*c)));
}

fn csv_err(e: csv::Error) -> Error {
    Error::Numerical(format!("writing table failed: {e}"))
}

/// Writer for one table with a fixed header.
pub struct Table<W: Write> {
    inner: csv::Writer<W>,
    width: usize,
}

impl<W: Write> Table<W> {
    pub fn new(w: W, header: &[&str]) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        inner.write_record(header).map_err(csv_err)?;
        Ok(Self { inner, width: header.len() })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        debug_assert_eq!(fields.len(), self.width);
        self.inner.write_record(fields).map_err(csv_err)
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| Error::Numerical(format!("writing table failed: {e}")))
    }
}

pub const CLOUD_HEADER: [&str; 8] = ["m", "x", "y", "z", "a", "kappa", "re_h", "im_h"];

/// One row per particle. Perfect conductors are written with `h = 0`,
/// `κ = 0`.
pub fn write_cloud<W: Write>(w: W, cloud: &ParticleCloud) -> Result<()> {
    let mut t = Table::new(w, &CLOUD_HEADER)?;
    for (m, p) in cloud.particles().iter().enumerate() {
        let (kappa, h) = match p.kind() {
            ParticleKind::Impedance { h, kappa, .. } => (*kappa, *h),
            ParticleKind::Pec { .. } => (0.0, Complex64::new(0.0, 0.0)),
        };
        let mut row = vec![m.to_string()];
        push_point(&mut row, p.center());
        row.push(num(p.size()));
        row.push(num(kappa));
        push_complex(&mut row, h);
        t.row(&row)?;
    }
    t.finish()
}

pub const FIELD_HEADER: [&str; 9] = ["x", "y", "z", "re_ex", "im_ex", "re_ey", "im_ey", "re_ez", "im_ez"];

pub fn write_field<W: Write>(w: W, points: &[Point], fields: &[ComplexVec3]) -> Result<()> {
    let mut t = Table::new(w, &FIELD_HEADER)?;
    for (x, e) in points.iter().zip(fields) {
        let mut row = Vec::with_capacity(9);
        push_point(&mut row, x);
        push_vec(&mut row, e);
        t.row(&row)?;
    }
    t.finish()
}

pub const FAR_FIELD_HEADER: [&str; 9] =
    ["beta_x", "beta_y", "beta_z", "re_ax", "im_ax", "re_ay", "im_ay", "re_az", "im_az"];

pub fn write_far_field<W: Write>(w: W, directions: &[Point], amplitudes: &[ComplexVec3]) -> Result<()> {
    let mut t = Table::new(w, &FAR_FIELD_HEADER)?;
    for (b, a) in directions.iter().zip(amplitudes) {
        let mut row = Vec::with_capacity(9);
        push_point(&mut row, b);
        push_vec(&mut row, a);
        t.row(&row)?;
    }
    t.finish()
}

pub const MEDIUM_HEADER: [&str; 10] = ["x", "y", "z", "n_density", "re_h", "im_h", "re_n", "im_n", "re_mu", "im_mu"];

pub fn write_medium<W: Write>(w: W, grid: &MediumGrid, medium: &EffectiveMedium) -> Result<()> {
    let mut t = Table::new(w, &MEDIUM_HEADER)?;
    for (p, x) in grid.grid().centers().iter().enumerate() {
        let mut row = Vec::with_capacity(10);
        push_point(&mut row, x);
        row.push(num(grid.density()[p]));
        push_complex(&mut row, grid.impedance()[p]);
        push_complex(&mut row, medium.n[p]);
        push_complex(&mut row, medium.mu_eff[p]);
        t.row(&row)?;
    }
    t.finish()
}

/// Formats a complex value as two CSV fields.
pub fn complex_fields(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

/// Round-trip exponent formatting used throughout the tables.
pub fn float_field(x: f64) -> String {
    num(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_table_round_trips() {
        let pts = vec![Point::new(0.1, -2.0, 3.5)];
        let e = vec![ComplexVec3::new(
            Complex64::new(1.0 / 3.0, -0.0),
            Complex64::new(1e-300, 2.0),
            Complex64::new(0.0, 0.0),
        )];
        let mut buf = Vec::new();
        write_field(&mut buf, &pts, &e).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), FIELD_HEADER.join(","));
        let values: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(values[3], 1.0 / 3.0);
        assert_eq!(values[5], 1e-300);
        assert_eq!(values[1], -2.0);
        assert!(lines.next().is_none());
    }
}
