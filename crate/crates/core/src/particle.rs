//! Closed-form responses of one small particle.
//!
//! A small particle is summarized by its dipole moment `Q`, which is linear
//! in the curl of the field acting on it: `Q = -P · (∇ × E_e)(x_m)` with a
//! 3×3 polarizability `P`:
//!
//! * impedance particle, `ζ = h / a^κ`: `P = ζ |S| / (iωμ) · τ`,
//! * perfectly conducting particle: `P = c_D a³ c_γ I`.
//!
//! The scattered field of the particle is the field of that moment,
//! `v = ∇g(x, x_m) × Q`.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::Serialize;

use crate::em::{cnorm, grad_green, CMat3, ComplexVec3, Point, WaveContext};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ParticleKind {
    /// Perfectly conducting body.
    Pec { c_d: f64, c_gamma: Complex64 },
    /// Impedance body with `ζ = h / a^κ`.
    Impedance {
        h: Complex64,
        kappa: f64,
        c_s: f64,
        tau: Matrix3<f64>,
        /// Replaces `τ` (e.g. by `(I + Γ)⁻¹ τ`) when present.
        tau1_override: Option<CMat3>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallParticle {
    center: Point,
    a: f64,
    kind: ParticleKind,
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::config(format!("kappa must lie in [0, 1), got {kappa}")));
    }
    Ok(())
}

pub(crate) fn check_h(h: Complex64) -> Result<()> {
    if !(h.re >= 0.0) || !h.is_finite() {
        return Err(Error::config(format!("impedance profile needs Re h >= 0, got {h}")));
    }
    Ok(())
}

impl SmallParticle {
    pub fn new(center: Point, a: f64, kind: ParticleKind) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::config(format!("particle size must be positive, got {a}")));
        }
        match &kind {
            ParticleKind::Pec { c_d, .. } => {
                if !(*c_d > 0.0) {
                    return Err(Error::config("c_D must be positive"));
                }
            }
            ParticleKind::Impedance { h, kappa, c_s, .. } => {
                check_h(*h)?;
                check_kappa(*kappa)?;
                if !(*c_s > 0.0) {
                    return Err(Error::config("c_S must be positive"));
                }
            }
        }
        Ok(Self { center, a, kind })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn size(&self) -> f64 {
        self.a
    }

    pub fn kind(&self) -> &ParticleKind {
        &self.kind
    }

    /// Boundary impedance `ζ = h / a^κ` (impedance particles only).
    pub fn zeta(&self) -> Option<Complex64> {
        match &self.kind {
            ParticleKind::Impedance { h, kappa, .. } => Some(h / self.a.powf(*kappa)),
            ParticleKind::Pec { .. } => None,
        }
    }

    /// `P` such that `Q = -P (∇ × E_e)`.
    pub fn polarizability(&self, ctx: &WaveContext) -> CMat3 {
        match &self.kind {
            ParticleKind::Pec { c_d, c_gamma } => CMat3::identity() * (c_gamma * c_d * self.a.powi(3)),
            ParticleKind::Impedance { c_s, tau, tau1_override, .. } => {
                let zeta = self.zeta().expect("impedance particle");
                let scale = zeta * (c_s * self.a * self.a) / (Complex64::i() * ctx.omega() * ctx.mu());
                let t = tau1_override.unwrap_or_else(|| tau.map(Complex64::from));
                t * scale
            }
        }
    }
}

/// `Q = -(ζ |S| / iωμ) τ' ∇×E`, with `τ'` the override when present.
pub fn impedance_moment(p: &SmallParticle, ctx: &WaveContext, curl_e: &ComplexVec3) -> Result<ComplexVec3> {
    match p.kind() {
        ParticleKind::Impedance { .. } => Ok(-(p.polarizability(ctx) * curl_e)),
        ParticleKind::Pec { .. } => Err(Error::config("impedance_moment needs an impedance particle")),
    }
}

/// `Q = -c_D a³ c_γ ∇×E`.
pub fn pec_moment(p: &SmallParticle, curl_e: &ComplexVec3) -> Result<ComplexVec3> {
    match p.kind() {
        ParticleKind::Pec { c_d, c_gamma } => Ok(crate::bie::q_asymptotic_pec(*c_d, p.size(), *c_gamma, curl_e)),
        ParticleKind::Impedance { .. } => Err(Error::config("pec_moment needs a perfectly conducting particle")),
    }
}

/// Scattered field of a point moment, `∇g(x, center) × Q`.
pub fn dipole_field(q: &ComplexVec3, center: &Point, k: Complex64, x: &Point) -> Result<ComplexVec3> {
    Ok(grad_green(k, x, center)?.cross(q))
}

/// Thresholds of the small-particle regime checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct ValidityThresholds {
    /// Warn when `ka + a/d` reaches this value.
    pub max_ka_plus_a_over_d: f64,
    /// Warn when `kd` reaches this value.
    pub max_kd: f64,
}

impl Default for ValidityThresholds {
    fn default() -> Self {
        Self { max_ka_plus_a_over_d: 0.1, max_kd: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub ka: f64,
    pub a_over_d: f64,
    pub kd: f64,
    pub valid: bool,
    pub warnings: Vec<String>,
}

/// Regime diagnostics for size `a`, spacing `d_min` and wavenumber `|k|`.
pub fn validity_report(
    a: f64,
    ctx: &WaveContext,
    d_min: f64,
    thresholds: ValidityThresholds,
) -> Result<ValidityReport> {
    if !(d_min > 0.0) {
        return Err(Error::config(format!("minimal distance must be positive, got {d_min}")));
    }
    let k = ctx.k().norm();
    let ka = k * a;
    let a_over_d = a / d_min;
    let kd = k * d_min;
    let mut warnings = Vec::new();
    if ka + a_over_d >= thresholds.max_ka_plus_a_over_d {
        warnings.push(format!(
            "ka + a/d = {:.4e} is not small (threshold {})",
            ka + a_over_d,
            thresholds.max_ka_plus_a_over_d
        ));
    }
    if kd.is_finite() && kd >= thresholds.max_kd {
        warnings.push(format!("kd = {kd:.4e} is not small (threshold {})", thresholds.max_kd));
    }
    Ok(ValidityReport { ka, a_over_d, kd, valid: warnings.is_empty(), warnings })
}

impl SmallParticle {
    pub fn validity_report(&self, ctx: &WaveContext, d_min: f64) -> Result<ValidityReport> {
        validity_report(self.a, ctx, d_min, ValidityThresholds::default())
    }
}

/// `|Q|` convenience used in scaling checks.
pub fn moment_magnitude(q: &ComplexVec3) -> f64 {
    cnorm(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::{complexify, far_field_amplitude};
    use std::f64::consts::PI;

    fn ctx() -> WaveContext {
        WaveContext::new(2.0, 1.5, Complex64::new(1.2, 0.0), Point::z(), complexify(&Point::y())).unwrap()
    }

    fn imp(a: f64, h: Complex64, kappa: f64) -> SmallParticle {
        SmallParticle::new(
            Point::new(0.1, 0.2, 0.3),
            a,
            ParticleKind::Impedance {
                h,
                kappa,
                c_s: 4.0 * PI,
                tau: Matrix3::identity() * (2.0 / 3.0),
                tau1_override: None,
            },
        )
        .unwrap()
    }

    fn curl() -> ComplexVec3 {
        ComplexVec3::new(Complex64::new(1.0, -0.5), Complex64::new(0.0, 2.0), Complex64::new(0.3, 0.0))
    }

    #[test]
    fn construction_checks() {
        let base = |h, kappa| {
            SmallParticle::new(
                Point::zeros(),
                0.1,
                ParticleKind::Impedance { h, kappa, c_s: 1.0, tau: Matrix3::identity(), tau1_override: None },
            )
        };
        assert!(base(Complex64::new(-0.1, 0.0), 0.5).is_err());
        assert!(base(Complex64::new(0.1, 0.0), 1.0).is_err());
        assert!(base(Complex64::new(0.0, -3.0), 0.0).is_ok());
        assert!(SmallParticle::new(Point::zeros(), 0.0, ParticleKind::Pec { c_d: 1.0, c_gamma: 1.0.into() }).is_err());
    }

    #[test]
    fn zero_impedance_gives_zero_moment() {
        let p = imp(0.01, Complex64::new(0.0, 0.0), 0.3);
        assert_eq!(impedance_moment(&p, &ctx(), &curl()).unwrap(), ComplexVec3::zeros());
    }

    #[test]
    fn impedance_sphere_formula() {
        let a = 0.01;
        let h = Complex64::new(2.0, 1.0);
        let kappa = 0.4;
        let c = ctx();
        let p = imp(a, h, kappa);
        let q = impedance_moment(&p, &c, &curl()).unwrap();
        let zeta = h / a.powf(kappa);
        let expected = -curl() * (2.0 * zeta * 4.0 * PI * a * a / (3.0 * Complex64::i() * c.omega() * c.mu()));
        assert!(cnorm(&(q - expected)) < 1e-14 * cnorm(&expected));
        assert!(pec_moment(&p, &curl()).is_err());
    }

    #[test]
    fn impedance_slope_is_two_minus_kappa() {
        let c = ctx();
        for kappa in [0.0, 0.5, 0.9] {
            let q1 = cnorm(&impedance_moment(&imp(1e-2, Complex64::new(1.0, 0.5), kappa), &c, &curl()).unwrap());
            let q2 = cnorm(&impedance_moment(&imp(1e-4, Complex64::new(1.0, 0.5), kappa), &c, &curl()).unwrap());
            let slope = (q1 / q2).ln() / 100f64.ln();
            assert!((slope - (2.0 - kappa)).abs() < 1e-12, "{slope}");
        }
    }

    #[test]
    fn default_override_path_is_equivalent() {
        let c = ctx();
        let p = imp(0.02, Complex64::new(1.0, 1.0), 0.5);
        let mut q = p.clone();
        if let ParticleKind::Impedance { tau, tau1_override, .. } = &mut q.kind {
            *tau1_override = Some(tau.map(Complex64::from));
        }
        assert_eq!(impedance_moment(&p, &c, &curl()).unwrap(), impedance_moment(&q, &c, &curl()).unwrap());
    }

    #[test]
    fn moments_are_linear() {
        let c = ctx();
        let p = imp(0.02, Complex64::new(1.0, 1.0), 0.5);
        let pec =
            SmallParticle::new(Point::zeros(), 0.02, ParticleKind::Pec { c_d: 4.0, c_gamma: Complex64::new(0.8, 0.1) })
                .unwrap();
        let c2 = ComplexVec3::new(0.5.into(), Complex64::new(-1.0, 1.0), 0.0.into());
        let s = Complex64::new(0.3, -2.0);
        let lhs = impedance_moment(&p, &c, &(curl() * s + c2)).unwrap();
        let rhs = impedance_moment(&p, &c, &curl()).unwrap() * s + impedance_moment(&p, &c, &c2).unwrap();
        assert!(cnorm(&(lhs - rhs)) <= 1e-14 * cnorm(&lhs));
        let lhs = pec_moment(&pec, &(curl() * s + c2)).unwrap();
        let rhs = pec_moment(&pec, &curl()).unwrap() * s + pec_moment(&pec, &c2).unwrap();
        assert!(cnorm(&(lhs - rhs)) <= 1e-14 * cnorm(&lhs));
    }

    #[test]
    fn pec_slope_and_ratio_to_impedance() {
        let pec = |a| {
            SmallParticle::new(Point::zeros(), a, ParticleKind::Pec { c_d: 4.0 * PI / 3.0, c_gamma: 1.0.into() })
                .unwrap()
        };
        let q1 = cnorm(&pec_moment(&pec(1e-2), &curl()).unwrap());
        let q2 = cnorm(&pec_moment(&pec(1e-3), &curl()).unwrap());
        assert!(((q1 / q2).log10() - 3.0).abs() < 1e-12);
        assert!(pec_moment(&pec(1e-2), &ComplexVec3::zeros()).unwrap() == ComplexVec3::zeros());

        // κ = 0: |Q_imp| / |Q_pec| ∝ 1/a.
        let c = ctx();
        let ratio = |a: f64| {
            cnorm(&impedance_moment(&imp(a, Complex64::new(1.0, 0.0), 0.0), &c, &curl()).unwrap())
                / cnorm(&pec_moment(&pec(a), &curl()).unwrap())
        };
        let (r1, r2, r3) = (ratio(1e-2), ratio(1e-3), ratio(1e-4));
        assert!((r2 / r1 - 10.0).abs() < 1e-9 && (r3 / r2 - 10.0).abs() < 1e-9);
    }

    #[test]
    fn dipole_field_properties() {
        let k = Complex64::new(1.5, 0.0);
        let center = Point::new(0.2, -0.1, 0.4);
        assert_eq!(dipole_field(&ComplexVec3::zeros(), &center, k, &Point::zeros()).unwrap(), ComplexVec3::zeros());
        assert!(dipole_field(&curl(), &center, k, &center).is_err());

        // Exactly transverse to the direction from the center.
        let beta = Point::new(0.3, 0.4, -0.5).normalize();
        for r in [0.1, 10.0, 100.0] {
            let v = dipole_field(&curl(), &center, k, &(center + beta * r)).unwrap();
            assert!(crate::em::dot_rc(&beta, &v).norm() <= 1e-14 * cnorm(&v));
        }

        // Far-field limit.
        let amp = far_field_amplitude(k, &curl(), &beta);
        let err = |r: f64| {
            let v = dipole_field(&curl(), &Point::zeros(), k, &(beta * r)).unwrap();
            cnorm(&(v * (r * (-Complex64::i() * k * r).exp()) - amp))
        };
        assert!(err(1000.0) < err(100.0) / 8.0);

        // Divergence-free away from the center.
        let x = Point::new(1.0, 0.5, -0.3);
        let h = 1e-4;
        let div: Complex64 = (0..3)
            .map(|a| {
                let mut e = Point::zeros();
                e[a] = h;
                (dipole_field(&curl(), &center, k, &(x + e)).unwrap()[a]
                    - dipole_field(&curl(), &center, k, &(x - e)).unwrap()[a])
                    / (2.0 * h)
            })
            .sum();
        let v = dipole_field(&curl(), &center, k, &x).unwrap();
        assert!(div.norm() < 1e-4 * cnorm(&v) * k.norm());
    }

    #[test]
    fn validity_examples() {
        let c = WaveContext::vacuum_like(2.0 * PI).unwrap();
        let r = validity_report(1e-3, &c, 1e-1, ValidityThresholds::default()).unwrap();
        assert!((r.ka - 2.0 * PI * 1e-3).abs() < 1e-15);
        assert!((r.a_over_d - 1e-2).abs() < 1e-15);
        assert!(r.valid);
        assert!(!validity_report(0.1, &c, 0.1, ValidityThresholds::default()).unwrap().valid);
        assert!(validity_report(0.1, &c, 0.0, ValidityThresholds::default()).is_err());

        // Exactly at the threshold: warn.
        let c1 = WaveContext::vacuum_like(1.0).unwrap();
        let t = ValidityThresholds { max_ka_plus_a_over_d: 0.5, max_kd: 10.0 };
        let r = validity_report(0.25, &c1, 1.0, t).unwrap();
        assert_eq!(r.ka + r.a_over_d, 0.5);
        assert!(!r.valid);
    }
}
