//! Pointwise effective-medium maps and their inversion.
//!
//! With `z = 1 + (2c₀ / 3iωμ) h N` the limiting medium has
//! `n = 1/√z` and `μ_eff = μ / z`. The square root uses the branch
//! `arg z ∈ [0, 2π)`, so `arg √z ∈ [0, π)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::em::WaveContext;
use crate::{Error, Result};

/// `√z = |z|^{1/2} e^{iφ/2}` with `φ = arg z ∈ [0, 2π)`.
pub fn sqrt_upper_branch(z: Complex64) -> Complex64 {
    let mut phi = z.im.atan2(z.re);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    Complex64::from_polar(z.norm().sqrt(), phi / 2.0)
}

/// `(2c₀ / 3ωμ) N`, written `c₁` in the design formulas (complex if `μ`
/// is).
pub fn c1(n: f64, ctx: &WaveContext, c0: f64) -> Complex64 {
    2.0 * c0 * n / (3.0 * ctx.omega() * ctx.mu())
}

fn check_inputs(h: Complex64, n: f64) -> Result<()> {
    crate::particle::check_h(h)?;
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::config(format!("density must be finite and non-negative, got {n}")));
    }
    Ok(())
}

/// `z = 1 + (2c₀ / 3iωμ) h N`.
pub fn contrast(h: Complex64, n: f64, ctx: &WaveContext, c0: f64) -> Result<Complex64> {
    check_inputs(h, n)?;
    let z = 1.0 + 2.0 * c0 * h * n / (3.0 * Complex64::i() * ctx.omega() * ctx.mu());
    if z.norm() <= 1e-14 {
        return Err(Error::Pole);
    }
    Ok(z)
}

/// `n = 1 / √(1 + (2c₀ / 3iωμ) h N)`.
pub fn refraction_coefficient(h: Complex64, n: f64, ctx: &WaveContext, c0: f64) -> Result<Complex64> {
    Ok(sqrt_upper_branch(contrast(h, n, ctx, c0)?).inv())
}

/// `μ_eff = μ / (1 + (2c₀ / 3iωμ) h N)`.
pub fn permeability(h: Complex64, n: f64, ctx: &WaveContext, c0: f64) -> Result<Complex64> {
    Ok(ctx.mu() / contrast(h, n, ctx, c0)?)
}

/// `1 + C_D N` with `C_D = c_D c_γ` for perfectly conducting particles.
pub fn contrast_pec(c_d: f64, c_gamma: Complex64, n: f64) -> Result<Complex64> {
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::config(format!("density must be finite and non-negative, got {n}")));
    }
    let z = 1.0 + c_gamma * c_d * n;
    if z.norm() <= 1e-14 {
        return Err(Error::Pole);
    }
    Ok(z)
}

/// `n = 1 / √(1 + C_D N)`.
pub fn refraction_coefficient_pec(c_d: f64, c_gamma: Complex64, n: f64) -> Result<Complex64> {
    Ok(sqrt_upper_branch(contrast_pec(c_d, c_gamma, n)?).inv())
}

/// `μ_eff = μ / (1 + C_D N)`.
pub fn permeability_pec(c_d: f64, c_gamma: Complex64, n: f64, ctx: &WaveContext) -> Result<Complex64> {
    Ok(ctx.mu() / contrast_pec(c_d, c_gamma, n)?)
}

/// Solves `1 + (2c₀ / 3iωμ) h N = z` for `h`, requiring `Re h ≥ 0`.
fn invert_contrast(z: Complex64, n: f64, ctx: &WaveContext, c0: f64) -> Result<Complex64> {
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::config(format!("density must be finite and non-negative, got {n}")));
    }
    if !z.is_finite() {
        return Err(Error::Infeasible(format!("target gives a non-finite contrast {z}")));
    }
    let dz = z - 1.0;
    if dz == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if n == 0.0 {
        return Err(Error::Infeasible("no particles (N = 0) but the target differs from the background".into()));
    }
    let h = Complex64::i() * dz / c1(n, ctx, c0);
    if h.re < 0.0 {
        return Err(Error::Infeasible(format!("target needs Re h = {:.3e} < 0 (Im z = {:.3e} > 0)", h.re, z.im)));
    }
    Ok(h)
}

/// `h` with `refraction_coefficient(h) = n_target`, from `z = 1/n★²`:
/// `h₂ = (Re z - 1)/c₁`, `h₁ = -Im z / c₁`.
pub fn design_h_at(n_target: Complex64, n: f64, ctx: &WaveContext, c0: f64) -> Result<Complex64> {
    if n_target.norm() == 0.0 || !n_target.is_finite() {
        return Err(Error::config(format!("refraction target must be finite and nonzero, got {n_target}")));
    }
    invert_contrast((n_target * n_target).inv(), n, ctx, c0)
}

/// `h` with `permeability(h) = mu_target`, from `u - iv = μ / μ★`.
pub fn design_h_for_mu_at(mu_target: Complex64, n: f64, ctx: &WaveContext, c0: f64) -> Result<Complex64> {
    if mu_target.norm() == 0.0 || !mu_target.is_finite() {
        return Err(Error::config(format!("permeability target must be finite and nonzero, got {mu_target}")));
    }
    invert_contrast(ctx.mu() / mu_target, n, ctx, c0)
}

/// Per-cell outcome of a design run.
#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    /// `None` on infeasible cells.
    pub h: Vec<Option<Complex64>>,
    pub infeasible: Vec<usize>,
    pub messages: Vec<String>,
}

impl DesignReport {
    pub fn feasible(&self, p: usize) -> bool {
        self.h[p].is_some()
    }

    pub fn all_feasible(&self) -> bool {
        self.infeasible.is_empty()
    }

    pub fn none_feasible(&self) -> bool {
        self.infeasible.len() == self.h.len()
    }
}

fn design_field<F>(targets: &[Complex64], density: &[f64], f: F) -> Result<DesignReport>
where
    F: Fn(Complex64, f64) -> Result<Complex64>,
{
    if targets.len() != density.len() {
        return Err(Error::config("target and density fields differ in length"));
    }
    let mut report =
        DesignReport { h: Vec::with_capacity(targets.len()), infeasible: Vec::new(), messages: Vec::new() };
    for (p, (&t, &n)) in targets.iter().zip(density).enumerate() {
        match f(t, n) {
            Ok(h) => report.h.push(Some(h)),
            Err(Error::Infeasible(msg)) => {
                report.h.push(None);
                report.infeasible.push(p);
                report.messages.push(format!("cell {p}: {msg}"));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

/// Pointwise [`design_h_at`] over a field; infeasible cells are listed
/// rather than aborting the run.
pub fn design_h_for_n(targets: &[Complex64], density: &[f64], ctx: &WaveContext, c0: f64) -> Result<DesignReport> {
    design_field(targets, density, |t, n| design_h_at(t, n, ctx, c0))
}

/// Pointwise [`design_h_for_mu_at`] over a field.
pub fn design_h_for_mu(targets: &[Complex64], density: &[f64], ctx: &WaveContext, c0: f64) -> Result<DesignReport> {
    design_field(targets, density, |t, n| design_h_for_mu_at(t, n, ctx, c0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::{complexify, Point};
    use proptest::prelude::*;

    fn ctx() -> WaveContext {
        WaveContext::new(2.0, 1.0, Complex64::new(1.0, 0.0), Point::z(), complexify(&Point::x())).unwrap()
    }

    const C0: f64 = 4.0 * PI;

    #[test]
    fn zero_impedance_is_background() {
        assert_eq!(refraction_coefficient(0.0.into(), 3.0, &ctx(), C0).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(permeability(0.0.into(), 3.0, &ctx(), C0).unwrap(), ctx().mu());
        assert_eq!(design_h_at(1.0.into(), 2.0, &ctx(), C0).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(design_h_for_mu_at(ctx().mu(), 2.0, &ctx(), C0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn real_contrast_gives_decreasing_real_index() {
        // h = i·t makes z = 1 + 2c₀ t N / 3ωμ real and > 1.
        let c = ctx();
        let mut last = 1.0;
        for n in [0.1, 0.5, 1.0, 4.0] {
            let v = refraction_coefficient(Complex64::new(0.0, 0.3), n, &c, C0).unwrap();
            assert_eq!(v.im, 0.0);
            assert!(v.re > 0.0 && v.re < last);
            last = v.re;
        }
    }

    #[test]
    fn positive_real_part_allows_negative_index() {
        let c = ctx();
        let n = refraction_coefficient(Complex64::new(1.0, -0.3), 1.0, &c, C0).unwrap();
        let z = contrast(Complex64::new(1.0, -0.3), 1.0, &c, C0).unwrap();
        assert!(z.im < 0.0);
        assert!(n.re < 0.0 && n.im < 0.0);
    }

    #[test]
    fn pole_and_input_errors() {
        let c = ctx();
        // z = 1 - c₁ h₂·... choose h = -i / (c₁) so that z = 0.
        let c1v = c1(1.0, &c, C0);
        assert!(matches!(refraction_coefficient(Complex64::new(0.0, -1.0) / c1v, 1.0, &c, C0), Err(Error::Pole)));
        assert!(refraction_coefficient(Complex64::new(-1.0, 0.0), 1.0, &c, C0).is_err());
        assert!(refraction_coefficient(Complex64::new(1.0, 0.0), -1.0, &c, C0).is_err());
        assert!(matches!(design_h_at(Complex64::new(1.2, 0.0), 0.0, &c, C0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn branch_examples() {
        assert_eq!(sqrt_upper_branch(Complex64::new(4.0, 0.0)), Complex64::new(2.0, 0.0));
        let r = sqrt_upper_branch(Complex64::new(-4.0, 0.0));
        assert!((r - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        let r = sqrt_upper_branch(Complex64::new(0.0, -1.0));
        assert!(r.re < 0.0 && r.im > 0.0);
    }

    #[test]
    fn negative_refraction_preset_recovered() {
        let c = ctx();
        let target = Complex64::new(-1.5, -1e-3);
        let h = design_h_at(target, 1.0, &c, C0).unwrap();
        assert!(h.re >= 0.0);
        let n = refraction_coefficient(h, 1.0, &c, C0).unwrap();
        assert!((n - target).norm() <= 1e-12 * target.norm());
    }

    #[test]
    fn pec_maps() {
        let c = ctx();
        let (cd, cg) = (4.0 * PI / 3.0, Complex64::new(1.5, 0.0));
        let n = refraction_coefficient_pec(cd, cg, 0.1).unwrap();
        let mu = permeability_pec(cd, cg, 0.1, &c).unwrap();
        assert!((mu - c.mu() * n * n).norm() < 1e-14);
        assert_eq!(refraction_coefficient_pec(cd, cg, 0.0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn field_design_lists_infeasible_cells() {
        let c = ctx();
        let targets = [Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.2), Complex64::new(-1.5, -1e-3)];
        let r = design_h_for_n(&targets, &[1.0, 1.0, 1.0], &c, C0).unwrap();
        for (p, t) in targets.iter().enumerate() {
            assert_eq!(r.feasible(p), (t * t).inv().im <= 0.0);
        }
        let r = design_h_for_n(&[Complex64::new(0.8, -0.1)], &[1.0], &c, C0).unwrap();
        assert!(r.none_feasible() && !r.messages.is_empty());
    }

    proptest! {
        #[test]
        fn sqrt_branch_contract(re in -10.0f64..10.0, im in -10.0f64..10.0) {
            let z = Complex64::new(re, im);
            prop_assume!(z.norm() > 1e-6);
            let s = sqrt_upper_branch(z);
            prop_assert!((s * s - z).norm() <= 1e-12 * z.norm());
            let arg = s.im.atan2(s.re);
            let arg = if arg < 0.0 { arg + 2.0 * PI } else { arg };
            prop_assert!((0.0..PI + 1e-12).contains(&arg));
        }

        #[test]
        fn n_and_mu_consistent(h1 in 0.0f64..5.0, h2 in -5.0f64..5.0, n in 0.0f64..3.0) {
            let c = ctx();
            let h = Complex64::new(h1, h2);
            if let (Ok(r), Ok(mu), Ok(z)) = (refraction_coefficient(h, n, &c, C0), permeability(h, n, &c, C0), contrast(h, n, &c, C0)) {
                prop_assert!((r * r * z - 1.0).norm() <= 1e-12);
                prop_assert!((mu - c.mu() * r * r).norm() <= 1e-12 * mu.norm().max(1.0));
            }
        }

        #[test]
        fn feasibility_characterized(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let t = Complex64::new(re, im);
            prop_assume!(t.norm() > 1e-3);
            let ok = design_h_at(t, 1.0, &ctx(), C0);
            prop_assert_eq!(ok.is_ok(), (t * t).inv().im <= 0.0);
            if let Ok(h) = ok {
                prop_assert!(h.re >= 0.0);
            }
        }

        #[test]
        fn mu_round_trip(phi in (PI + 1e-6)..(2.0 * PI - 1e-6), r in 0.1f64..5.0) {
            let c = ctx();
            let z = Complex64::from_polar(r, phi);
            let target = c.mu() / z;
            let h = design_h_for_mu_at(target, 1.0, &c, C0).unwrap();
            prop_assert!(h.re >= 0.0);
            let mu = permeability(h, 1.0, &c, C0).unwrap();
            prop_assert!((mu - target).norm() <= 1e-12 * target.norm());
        }
    }
}
