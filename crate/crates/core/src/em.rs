//! Incident plane wave and free-space Helmholtz kernels.
//!
//! The scalar Green function is `g(x, y) = exp(ik|x-y|) / (4π|x-y|)`.
//! Everything that couples particles goes through [`grad_green`] and
//! [`double_curl_matrix`]; the latter is the closed-form matrix of
//! `A ↦ ∇ₓ × [∇ₓ g(x, y), A] = k² g A + (∇∇g) A` for a constant vector `A`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point (or real direction) in space.
pub type Point = Vector3<f64>;
/// Complex field vector: E, H, moments `Q`, curls `A_m`.
pub type ComplexVec3 = Vector3<Complex64>;
/// Complex 3×3 tensor (polarizabilities, kernel blocks).
pub type CMat3 = Matrix3<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn complexify(v: &Point) -> ComplexVec3 {
    v.map(Complex64::from)
}

/// `a × b` for a real `a` and complex `b`.
pub(crate) fn cross_rc(a: &Point, b: &ComplexVec3) -> ComplexVec3 {
    Vector3::new(b[2] * a[1] - b[1] * a[2], b[0] * a[2] - b[2] * a[0], b[1] * a[0] - b[0] * a[1])
}

/// Non-conjugating `a · b` for a real `a` and complex `b`.
pub(crate) fn dot_rc(a: &Point, b: &ComplexVec3) -> Complex64 {
    b[0] * a[0] + b[1] * a[1] + b[2] * a[2]
}

/// Euclidean norm of a complex vector.
pub fn cnorm(v: &ComplexVec3) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Frequency, background medium and incident plane wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WaveSpec", into = "WaveSpec")]
pub struct WaveContext {
    omega: f64,
    eps: f64,
    mu: Complex64,
    k: Complex64,
    alpha: Point,
    polarization: ComplexVec3,
}

impl WaveContext {
    /// Tolerance on `|α| = 1` and `α · ℰ = 0`.
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(omega: f64, eps: f64, mu: Complex64, alpha: Point, polarization: ComplexVec3) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::config(format!("omega must be positive, got {omega}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::config(format!("eps must be positive, got {eps}")));
        }
        if !(mu.re >= 0.0) || !mu.is_finite() || mu.norm() == 0.0 {
            return Err(Error::config(format!("mu must be nonzero with Re mu >= 0, got {mu}")));
        }
        if (alpha.norm() - 1.0).abs() > Self::TOLERANCE {
            return Err(Error::config(format!("incident direction must be a unit vector, |alpha| = {}", alpha.norm())));
        }
        let e_norm = cnorm(&polarization);
        if !polarization.iter().all(|c| c.is_finite()) {
            return Err(Error::config("polarization must be finite"));
        }
        if dot_rc(&alpha, &polarization).norm() > Self::TOLERANCE * e_norm.max(1.0) {
            return Err(Error::config("polarization must be orthogonal to the incident direction"));
        }
        let k = omega * (eps * mu).sqrt();
        Ok(Self { omega, eps, mu, k, alpha, polarization })
    }

    /// Lossless unit-amplitude setup: `ε = μ = 1`, `ω = k`, `α = e_z`, `ℰ = e_x`.
    pub fn vacuum_like(k: f64) -> Result<Self> {
        Self::new(k, 1.0, Complex64::new(1.0, 0.0), Point::z(), complexify(&Point::x()))
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    /// Wavenumber `k = ω√(εμ)` (principal root).
    pub fn k(&self) -> Complex64 {
        self.k
    }

    pub fn alpha(&self) -> &Point {
        &self.alpha
    }

    pub fn polarization(&self) -> &ComplexVec3 {
        &self.polarization
    }

    /// Same medium and direction with a rescaled polarization.
    pub fn with_polarization(&self, polarization: ComplexVec3) -> Result<Self> {
        Self::new(self.omega, self.eps, self.mu, self.alpha, polarization)
    }

    fn phase(&self, x: &Point) -> Complex64 {
        (I * self.k * self.alpha.dot(x)).exp()
    }

    /// `E₀(x) = ℰ exp(ik α·x)`.
    pub fn plane_wave(&self, x: &Point) -> ComplexVec3 {
        self.polarization * self.phase(x)
    }

    /// `∇ × E₀(x) = ik (α × ℰ) exp(ik α·x)`.
    pub fn plane_wave_curl(&self, x: &Point) -> ComplexVec3 {
        cross_rc(&self.alpha, &self.polarization) * (I * self.k * self.phase(x))
    }
}

#[derive(Serialize, Deserialize)]
struct WaveSpec {
    omega: f64,
    #[serde(default = "one")]
    eps: f64,
    #[serde(default = "one_c")]
    mu: Complex64,
    alpha: [f64; 3],
    polarization: [Complex64; 3],
}

fn one() -> f64 {
    1.0
}

fn one_c() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl TryFrom<WaveSpec> for WaveContext {
    type Error = Error;

    fn try_from(s: WaveSpec) -> Result<Self> {
        WaveContext::new(s.omega, s.eps, s.mu, Point::from(s.alpha), ComplexVec3::from(s.polarization))
    }
}

impl From<WaveContext> for WaveSpec {
    fn from(c: WaveContext) -> Self {
        WaveSpec { omega: c.omega, eps: c.eps, mu: c.mu, alpha: c.alpha.into(), polarization: c.polarization.into() }
    }
}

fn separation(x: &Point, y: &Point) -> Result<(Point, f64)> {
    let d = x - y;
    let r = d.norm();
    if r == 0.0 {
        return Err(Error::SingularPoint("x = y"));
    }
    Ok((d, r))
}

#[inline]
fn green_r(k: Complex64, r: f64) -> Complex64 {
    (I * k * r).exp() / (4.0 * PI * r)
}

/// `g(x, y) = exp(ik|x-y|) / (4π|x-y|)`.
pub fn green(k: Complex64, x: &Point, y: &Point) -> Result<Complex64> {
    let (_, r) = separation(x, y)?;
    Ok(green_r(k, r))
}

#[inline]
pub(crate) fn grad_green_unchecked(k: Complex64, d: &Point, r: f64) -> ComplexVec3 {
    let s = green_r(k, r) * (I * k - 1.0 / r) / r;
    Vector3::new(s * d[0], s * d[1], s * d[2])
}

/// Gradient of `g` with respect to its first argument.
pub fn grad_green(k: Complex64, x: &Point, y: &Point) -> Result<ComplexVec3> {
    let (d, r) = separation(x, y)?;
    Ok(grad_green_unchecked(k, &d, r))
}

/// Hessian `∂ᵢ∂ⱼ g` with respect to the first argument.
pub fn hessian_green(k: Complex64, x: &Point, y: &Point) -> Result<CMat3> {
    let (d, r) = separation(x, y)?;
    let g = green_r(k, r);
    let ikr = I * k * r;
    let r2 = r * r;
    let iso = g * (ikr - 1.0) / r2;
    let radial = g * (3.0 - 3.0 * ikr + ikr * ikr) / r2;
    Ok(dyad(iso, radial, &(d / r)))
}

fn dyad(iso: Complex64, radial: Complex64, u: &Point) -> CMat3 {
    Matrix3::from_fn(|i, j| {
        let delta = if i == j { iso } else { Complex64::new(0.0, 0.0) };
        delta + radial * (u[i] * u[j])
    })
}

#[inline]
pub(crate) fn double_curl_unchecked(k: Complex64, d: &Point, r: f64) -> CMat3 {
    let g = green_r(k, r);
    let ikr = I * k * r;
    let r2 = r * r;
    let iso = g * (k * k + (ikr - 1.0) / r2);
    let radial = g * (3.0 - 3.0 * ikr + ikr * ikr) / r2;
    dyad(iso, radial, &(d / r))
}

/// Matrix of `A ↦ ∇ₓ × [∇ₓ g(x, y), A]`, i.e. `k² g I + ∇∇g`.
pub fn double_curl_matrix(k: Complex64, x: &Point, y: &Point) -> Result<CMat3> {
    let (d, r) = separation(x, y)?;
    Ok(double_curl_unchecked(k, &d, r))
}

/// `∇ₓ × [∇ₓ g(x, y), A]` for a constant vector `A`.
pub fn double_curl_kernel(k: Complex64, x: &Point, y: &Point, a: &ComplexVec3) -> Result<ComplexVec3> {
    Ok(double_curl_matrix(k, x, y)? * a)
}

/// Scattering amplitude of a point moment: `(ik/4π) β × Q`.
pub fn far_field_amplitude(k: Complex64, q: &ComplexVec3, beta: &Point) -> ComplexVec3 {
    cross_rc(beta, q) * (I * k / (4.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ctx() -> WaveContext {
        let alpha = Point::new(1.0, 2.0, 2.0) / 3.0;
        let e = ComplexVec3::new(Complex64::new(2.0, 0.5), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -0.25));
        let e = e - complexify(&alpha) * dot_rc(&alpha, &e);
        WaveContext::new(1.3, 1.1, Complex64::new(0.9, 0.0), alpha, e).unwrap()
    }

    fn cdiff(f: impl Fn(&Point) -> ComplexVec3, x: &Point, axis: usize, h: f64) -> ComplexVec3 {
        let mut e = Point::zeros();
        e[axis] = h;
        (f(&(x + e)) - f(&(x - e))) / Complex64::from(2.0 * h)
    }

    fn fd_curl(f: impl Fn(&Point) -> ComplexVec3, x: &Point, h: f64) -> ComplexVec3 {
        let d: Vec<ComplexVec3> = (0..3).map(|a| cdiff(&f, x, a, h)).collect();
        Vector3::new(d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0])
    }

    fn fd_div(f: impl Fn(&Point) -> ComplexVec3, x: &Point, h: f64) -> Complex64 {
        (0..3).map(|a| cdiff(&f, x, a, h)[a]).sum()
    }

    #[test]
    fn rejects_bad_context() {
        let e = complexify(&Point::x());
        assert!(WaveContext::new(1.0, 1.0, 1.0.into(), Point::x(), e).is_err());
        assert!(WaveContext::new(1.0, 1.0, 1.0.into(), Point::new(0.0, 0.0, 1.1), e).is_err());
        assert!(WaveContext::new(-1.0, 1.0, 1.0.into(), Point::z(), e).is_err());
        assert!(WaveContext::new(1.0, 1.0, Complex64::new(-1.0, 0.0), Point::z(), e).is_err());
    }

    #[test]
    fn wavenumber_squared() {
        let c = ctx();
        let k2 = c.omega() * c.omega() * c.eps() * c.mu();
        assert_relative_eq!((c.k() * c.k() - k2).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn plane_wave_values() {
        let c = ctx();
        assert_eq!(c.plane_wave(&Point::zeros()), *c.polarization());

        let c = WaveContext::vacuum_like(2.0).unwrap();
        let x = Point::new(0.3, -0.7, PI / 2.0);
        let e = c.plane_wave(&x);
        assert_relative_eq!(e[0].re, -1.0, epsilon = 1e-15);
        assert_relative_eq!(e[0].im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn plane_wave_is_solenoidal_helmholtz_field() {
        let c = ctx();
        let k = c.k();
        let h = 1e-4;
        for x in [Point::new(0.1, 0.2, -0.3), Point::new(-1.5, 0.7, 2.0)] {
            let div = fd_div(|p| c.plane_wave(p), &x, h);
            assert!(div.norm() < 1e-6 * k.norm() * cnorm(c.polarization()));

            let lap: ComplexVec3 = (0..3)
                .map(|a| {
                    let mut e = Point::zeros();
                    e[a] = h;
                    (c.plane_wave(&(x + e)) - c.plane_wave(&x) * Complex64::from(2.0) + c.plane_wave(&(x - e)))
                        / Complex64::from(h * h)
                })
                .sum();
            let resid = lap + c.plane_wave(&x) * (k * k);
            assert!(cnorm(&resid) < 1e-4 * (k * k).norm() * cnorm(&c.plane_wave(&x)));
        }
    }

    #[test]
    fn plane_wave_curl_matches_finite_differences() {
        let c = ctx();
        assert_relative_eq!(
            (c.plane_wave_curl(&Point::zeros()) - cross_rc(c.alpha(), c.polarization()) * (I * c.k())).norm(),
            0.0
        );
        let h = 1e-5 / c.k().norm();
        for x in [Point::new(0.4, -0.1, 0.9), Point::new(3.0, 1.0, -2.0)] {
            let fd = fd_curl(|p| c.plane_wave(p), &x, h);
            let an = c.plane_wave_curl(&x);
            assert!(cnorm(&(fd - an)) < 1e-6 * cnorm(&an));
        }
    }

    #[test]
    fn green_values_and_singularity() {
        let x = Point::new(1.0, 0.0, 0.0);
        let y = Point::zeros();
        assert_relative_eq!(green(0.0.into(), &x, &y).unwrap().re, 1.0 / (4.0 * PI));
        let x = Point::new(0.3, 2.0, -1.0);
        let r = (x - y).norm();
        assert_relative_eq!(green(3.7.into(), &x, &y).unwrap().norm(), 1.0 / (4.0 * PI * r), max_relative = 1e-14);
        assert!(matches!(green(1.0.into(), &y, &y), Err(Error::SingularPoint(_))));
        assert!(grad_green(1.0.into(), &y, &y).is_err());
        assert!(double_curl_kernel(1.0.into(), &y, &y, &ComplexVec3::zeros()).is_err());
    }

    #[test]
    fn green_satisfies_helmholtz_off_diagonal() {
        let k = Complex64::new(2.0, 0.1);
        let y = Point::new(0.1, -0.2, 0.3);
        let x = Point::new(0.8, 0.4, -0.5);
        let h = 1e-3;
        let g = |p: &Point| green(k, p, &y).unwrap();
        let mut lap = Complex64::new(0.0, 0.0);
        for a in 0..3 {
            let mut e = Point::zeros();
            e[a] = h;
            lap += (g(&(x + e)) - 2.0 * g(&x) + g(&(x - e))) / (h * h);
        }
        let resid = lap + k * k * g(&x);
        assert!(resid.norm() < 1e-4 * g(&x).norm() * (k * k).norm());
    }

    #[test]
    fn grad_green_matches_finite_differences() {
        let k = Complex64::new(1.0, 0.0);
        let y = Point::zeros();
        let x = Point::new(0.6, 0.0, 0.8);
        let h = 1e-5;
        let fd = Vector3::from_fn(|a, _| {
            let mut e = Point::zeros();
            e[a] = h;
            (green(k, &(x + e), &y).unwrap() - green(k, &(x - e), &y).unwrap()) / (2.0 * h)
        });
        let an = grad_green(k, &x, &y).unwrap();
        assert!(cnorm(&(fd - an)) < 1e-7 * cnorm(&an));
    }

    #[test]
    fn grad_green_static_limit_and_bound() {
        let x = Point::new(0.2, -0.4, 1.0);
        let y = Point::new(-0.1, 0.3, 0.2);
        let d = x - y;
        let r = d.norm();
        let g = grad_green(0.0.into(), &x, &y).unwrap();
        let coulomb = -d / (4.0 * PI * r.powi(3));
        for i in 0..3 {
            assert_relative_eq!(g[i].re, coulomb[i], max_relative = 1e-14);
            assert_eq!(g[i].im, 0.0);
        }
        for k in [0.1, 1.0, 10.0] {
            let g = grad_green(k.into(), &x, &y).unwrap();
            assert!(cnorm(&g) <= (k + 1.0 / r) / (4.0 * PI * r) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn double_curl_matches_nested_finite_differences() {
        let k = Complex64::new(1.0, 0.0);
        let y = Point::zeros();
        let x = Point::new(0.0, 0.6, 0.8);
        let a = ComplexVec3::new(1.0.into(), 0.0.into(), 0.0.into());
        let h = 1e-4;
        let field = |p: &Point| grad_green(k, p, &y).unwrap().cross(&a);
        let fd = fd_curl(field, &x, h);
        let an = double_curl_kernel(k, &x, &y, &a).unwrap();
        assert!(cnorm(&(fd - an)) < 1e-5 * cnorm(&an));

        // ∇ · ∇ × [∇g, A] = 0
        let div = fd_div(|p| double_curl_kernel(k, p, &y, &a).unwrap(), &x, h);
        assert!(div.norm() < 1e-5 * cnorm(&an));
    }

    #[test]
    fn double_curl_is_k2_g_plus_hessian() {
        let k = Complex64::new(1.7, 0.2);
        let x = Point::new(0.3, 0.1, -0.4);
        let y = Point::new(-0.2, 0.5, 0.1);
        let dc = double_curl_matrix(k, &x, &y).unwrap();
        let h = hessian_green(k, &x, &y).unwrap();
        let g = green(k, &x, &y).unwrap();
        let diff = dc - h - CMat3::identity() * (k * k * g);
        assert!(diff.norm() < 1e-13 * dc.norm());

        // Hessian against differences of the analytic gradient.
        let step = 1e-5;
        for j in 0..3 {
            let mut e = Point::zeros();
            e[j] = step;
            let col = (grad_green(k, &(x + e), &y).unwrap() - grad_green(k, &(x - e), &y).unwrap())
                / Complex64::from(2.0 * step);
            for i in 0..3 {
                assert!((col[i] - h[(i, j)]).norm() < 1e-7 * h.norm());
            }
        }
    }

    #[test]
    fn static_dipole_closed_form() {
        let y = Point::zeros();
        let x = Point::new(0.0, 0.0, 2.0);
        let r: f64 = 2.0;
        let rhat = Point::z();
        for a in [Point::z(), Point::x(), Point::new(1.0, -1.0, 2.0)] {
            let ac = complexify(&a);
            let got = double_curl_kernel(0.0.into(), &x, &y, &ac).unwrap();
            let expected = -(a - 3.0 * a.dot(&rhat) * rhat) / (4.0 * PI * r.powi(3));
            for i in 0..3 {
                assert_relative_eq!(got[i].re, expected[i], epsilon = 1e-15);
            }
            // The finite-difference oracle fixes the sign convention.
            let fd = fd_curl(|p| grad_green(0.0.into(), p, &y).unwrap().cross(&ac), &x, 1e-4);
            assert!(cnorm(&(fd - got)) < 1e-6 * cnorm(&got));
        }
    }

    #[test]
    fn far_field_amplitude_examples() {
        let k = Complex64::from(1.0);
        let q = complexify(&Point::z());
        let a = far_field_amplitude(k, &q, &Point::x());
        let expected = -I * k / (4.0 * PI);
        assert_relative_eq!((a[1] - expected).norm(), 0.0, epsilon = 1e-16);
        assert_eq!(a[0], Complex64::new(0.0, 0.0));
        assert_eq!(a[2], Complex64::new(0.0, 0.0));
        let par = far_field_amplitude(k, &complexify(&Point::x()), &Point::x());
        assert_eq!(cnorm(&par), 0.0);
    }

    #[test]
    fn dipole_far_field_converges_to_amplitude() {
        let k = Complex64::from(2.0);
        let q = ComplexVec3::new(Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.0), Complex64::new(0.2, 2.0));
        let beta = Point::new(1.0, -2.0, 0.5).normalize();
        let amp = far_field_amplitude(k, &q, &beta);
        let err = |r: f64| {
            let v = grad_green(k, &(beta * r), &Point::zeros()).unwrap().cross(&q);
            cnorm(&(v * (r * (-I * k * r).exp()) - amp))
        };
        let (e1, e2, e3) = (err(10.0), err(100.0), err(1000.0));
        assert!(e2 * 8.0 <= e1 && e3 * 8.0 <= e2, "{e1} {e2} {e3}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn vec3() -> impl Strategy<Value = Point> {
            (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b, c)| Point::new(a, b, c))
        }

        proptest! {
            #[test]
            fn far_field_is_transverse(q in (vec3(), vec3()), b in vec3()) {
                prop_assume!(b.norm() > 1e-3);
                let beta = b.normalize();
                let q = q.0.map(Complex64::from) + q.1.map(|v| Complex64::new(0.0, v));
                let a = far_field_amplitude(Complex64::from(1.3), &q, &beta);
                prop_assert!(dot_rc(&beta, &a).norm() <= 1e-12 * cnorm(&q).max(1.0));
            }

            #[test]
            fn plane_wave_divergence_free(x in vec3()) {
                let c = ctx();
                let div = fd_div(|p| c.plane_wave(p), &x, 1e-4);
                prop_assert!(div.norm() < 1e-6 * c.k().norm() * cnorm(c.polarization()));
            }
        }
    }
}
