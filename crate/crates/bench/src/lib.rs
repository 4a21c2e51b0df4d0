//! Shared fixtures for the benchmarks under `benches/`.

use smallscat::manybody::place_particles;
use smallscat::profile::Profile;
use smallscat::{CloudConfig, Complex64, ComplexVec3, DomainBox, ParticleCloud, Point, ShapeConstants, WaveContext};

/// `k = 1`, incidence along `z`, polarization along `x`.
pub fn context() -> WaveContext {
    let pol = ComplexVec3::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    WaveContext::new(1.0, 1.0, Complex64::new(1.0, 0.0), Point::z(), pol).expect("valid context")
}

/// Uniform impedance cloud in the unit cube with `κ = 0.9`, so about
/// `a^{-1.1}` particles.
pub fn cloud(a: f64, cube_side: f64) -> ParticleCloud {
    let cfg = CloudConfig::impedance(
        DomainBox::unit_cube(),
        Profile::constant(1.0),
        Profile::constant(Complex64::new(1.0, 0.5)),
        a,
        0.9,
        ShapeConstants::ball(1.0),
        cube_side,
    );
    place_particles(&cfg).expect("cloud fits")
}
