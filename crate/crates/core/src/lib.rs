//! Electromagnetic wave scattering by one and by many small particles.
//!
//! The crate covers the whole chain from a single small body to an
//! engineered medium:
//!
//! * [`em`]: plane waves, the scalar Helmholtz Green function and its
//!   derivatives, far-field amplitudes.
//! * [`shape`]: triangulated particle surfaces and the shape constants
//!   (`c_D`, `c_S`, the tensor `tau`).
//! * [`bie`]: boundary-integral solver for one small perfectly conducting
//!   body, used to obtain the correction factor `c_gamma` and to validate
//!   the closed-form dipole moment.
//! * [`particle`]: closed-form dipole moments of small impedance and
//!   perfectly conducting particles.
//! * [`manybody`]: particle placement, the full and cube-reduced linear
//!   systems, and field evaluation.
//! * [`medium`]: the limiting integral equation, effective refraction
//!   coefficient and permeability, and the inverse design of `h(x)`.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bie;
pub mod em;
mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod manybody;
pub mod medium;
pub mod particle;
pub mod profile;
pub mod shape;

pub use em::{CMat3, ComplexVec3, Point, WaveContext};
pub use error::{Error, ErrorClass, Result};
pub use grid::{CubeGrid, DomainBox};
pub use manybody::{CloudConfig, CloudSolution, ParticleCloud};
pub use medium::{EffectiveMedium, LimitKind, MediumGrid};
pub use particle::{ParticleKind, SmallParticle};
pub use profile::Profile;
pub use shape::{ShapeConstants, SurfaceMesh};

pub use num_complex::Complex64;
