//! Run configuration files (TOML). Complex numbers are written as
//! `[re, im]` pairs; a bare number is accepted where a complex scalar is
//! expected.

use std::path::Path;

use serde::Deserialize;
use smallscat::grid::DomainBox;
use smallscat::manybody::CloudKind;
use smallscat::particle::ValidityThresholds;
use smallscat::shape::{make_ellipsoid, make_icosphere, ShapeConstants, SurfaceMesh};
use smallscat::{CMat3, CloudConfig, Complex64, ComplexVec3, Point, Profile, WaveContext};

use crate::CliError;

/// Complex scalar: `1.5` or `[1.5, -0.2]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum ComplexInput {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexInput> for Complex64 {
    fn from(c: ComplexInput) -> Self {
        match c {
            ComplexInput::Real(re) => Complex64::new(re, 0.0),
            ComplexInput::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn unit_mu() -> ComplexInput {
    ComplexInput::Real(1.0)
}

/// Incident plane wave `ℰ e^{ikα·x}` in a medium `(ε, μ)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSection {
    pub omega: f64,
    #[serde(default = "one")]
    pub eps: f64,
    #[serde(default = "unit_mu")]
    pub mu: ComplexInput,
    pub direction: [f64; 3],
    pub polarization: [ComplexInput; 3],
}

impl WaveSection {
    pub fn context(&self) -> Result<WaveContext, CliError> {
        let alpha = Point::from(self.direction);
        let pol =
            ComplexVec3::new(self.polarization[0].into(), self.polarization[1].into(), self.polarization[2].into());
        Ok(WaveContext::new(self.omega, self.eps, self.mu.into(), alpha, pol)?)
    }
}

/// Particle or body shape.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    /// Ball of the given radius; clouds use its exact constants.
    Sphere {
        #[serde(default = "one")]
        radius: f64,
    },
    /// Ellipsoid; constants come from a mesh of the given refinement.
    Ellipsoid {
        semi_axes: [f64; 3],
        #[serde(default = "default_refinement")]
        refinement: u32,
    },
}

fn default_refinement() -> u32 {
    3
}

impl ShapeSpec {
    pub fn mesh(&self, refinement: u32) -> Result<SurfaceMesh, CliError> {
        Ok(match self {
            ShapeSpec::Sphere { radius } => make_icosphere(*radius, refinement)?,
            ShapeSpec::Ellipsoid { semi_axes, .. } => make_ellipsoid(*semi_axes, refinement)?,
        })
    }

    /// The same shape scaled to characteristic size `a`.
    pub fn mesh_of_size(&self, a: f64, refinement: u32) -> Result<SurfaceMesh, CliError> {
        let m = self.mesh(refinement)?;
        Ok(m.scaled(a / m.size())?)
    }

    pub fn constants(&self) -> Result<ShapeConstants, CliError> {
        Ok(match self {
            ShapeSpec::Sphere { radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(CliError::Invalid(format!("sphere radius must be positive, got {radius}")));
                }
                ShapeConstants::ball(*radius)
            }
            ShapeSpec::Ellipsoid { refinement, .. } => ShapeConstants::from_mesh(&self.mesh(*refinement)?),
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ParticleType {
    Impedance,
    Pec,
}

/// Particle cloud description.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudSection {
    pub domain: DomainBox,
    pub density: Profile<f64>,
    /// Impedance profile `h(x)`, values as `[re, im]`; ignored for `pec`.
    #[serde(default = "zero_impedance")]
    pub impedance: Profile<Complex64>,
    pub a: f64,
    #[serde(default)]
    pub kappa: f64,
    pub particle: ParticleType,
    #[serde(default = "default_shape")]
    pub shape: ShapeSpec,
    pub cube_side: f64,
    #[serde(default = "default_cube_ratio")]
    pub min_cube_ratio: f64,
    /// Correction factor of perfect conductors; computed from the
    /// boundary-integral solver when absent.
    pub c_gamma: Option<ComplexInput>,
    /// Mesh refinement used when `c_gamma` is computed.
    #[serde(default = "default_refinement")]
    pub c_gamma_refinement: u32,
    /// Replaces `τ` in the impedance polarizability (row-major, real).
    pub tau_override: Option<[[f64; 3]; 3]>,
}

fn zero_impedance() -> Profile<Complex64> {
    Profile::constant(Complex64::new(0.0, 0.0))
}

fn default_shape() -> ShapeSpec {
    ShapeSpec::Sphere { radius: 1.0 }
}

fn default_cube_ratio() -> f64 {
    smallscat::manybody::DEFAULT_MIN_CUBE_RATIO
}

impl CloudSection {
    /// Builds the cloud configuration for particle size `a`.
    pub fn build(&self, ctx: &WaveContext, a: f64) -> Result<CloudConfig, CliError> {
        let domain = DomainBox::new(self.domain.corner, self.domain.extents)?;
        let shape = self.shape.constants()?;
        let mut cfg = match self.particle {
            ParticleType::Impedance => {
                let mut c = CloudConfig::impedance(
                    domain,
                    self.density.clone(),
                    self.impedance.clone(),
                    a,
                    self.kappa,
                    shape,
                    self.cube_side,
                );
                if let Some(t) = self.tau_override {
                    let m = CMat3::from_fn(|i, j| Complex64::from(t[i][j]));
                    c.kind = CloudKind::Impedance { tau1_override: Some(m) };
                }
                c
            }
            ParticleType::Pec => {
                if self.kappa != 0.0 {
                    return Err(CliError::Invalid("kappa applies to impedance particles only".into()));
                }
                let c_gamma = match self.c_gamma {
                    Some(c) => c.into(),
                    None => self.computed_c_gamma(ctx, a)?,
                };
                CloudConfig::pec(domain, self.density.clone(), a, c_gamma, shape, self.cube_side)
            }
        };
        cfg.min_cube_ratio = self.min_cube_ratio;
        cfg.validate()?;
        Ok(cfg)
    }

    fn computed_c_gamma(&self, ctx: &WaveContext, a: f64) -> Result<Complex64, CliError> {
        let mesh = self.shape.mesh_of_size(a, self.c_gamma_refinement)?;
        let current = smallscat::bie::solve_current(&mesh, ctx)?;
        let gd = smallscat::bie::gamma_from_current(&mesh, ctx.k(), &current)?;
        log::info!("c_gamma = {} from refinement {}", gd.c_gamma, self.c_gamma_refinement);
        Ok(gd.c_gamma)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    #[default]
    Auto,
    Dense,
    Iterative,
}

/// Regular grid of probe points `corner + (i + ½) · extents / counts`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointGrid {
    pub corner: [f64; 3],
    pub extents: [f64; 3],
    pub counts: [usize; 3],
}

impl PointGrid {
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        if self.counts.contains(&0) || self.extents.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(CliError::Invalid("field grid needs positive counts and finite extents".into()));
        }
        let [nx, ny, nz] = self.counts;
        let mut pts = Vec::with_capacity(nx * ny * nz);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let f = |c: usize, n: usize, axis: usize| {
                        self.corner[axis] + (c as f64 + 0.5) * self.extents[axis] / n as f64
                    };
                    pts.push(Point::new(f(i, nx, 0), f(j, ny, 1), f(k, nz, 2)));
                }
            }
        }
        Ok(pts)
    }
}

/// `n` nearly uniform unit directions (Fibonacci lattice).
pub fn sphere_directions(n: usize) -> Vec<Point> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Point::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

fn to_points(v: &[[f64; 3]]) -> Vec<Point> {
    v.iter().map(|p| Point::from(*p)).collect()
}

// ---- shape ----

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeConfig {
    pub shape: ShapeSpec,
    pub refinements: Vec<u32>,
    /// Wavenumber of the half-identity check, relative to the body size.
    #[serde(default = "default_half_ka")]
    pub half_identity_ka: f64,
}

fn default_half_ka() -> f64 {
    0.01
}

// ---- bie-validate ----

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BieConfig {
    pub wave: WaveSection,
    pub shape: ShapeSpec,
    pub refinement: u32,
    pub ka: Vec<f64>,
}

// ---- scatter ----

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum LevelChoice {
    #[default]
    Full,
    Reduced,
    /// Both systems plus a probe comparison table.
    Both,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterSection {
    #[serde(default)]
    pub level: LevelChoice,
    #[serde(default)]
    pub solver: SolverChoice,
    #[serde(default)]
    pub probes: Vec<[f64; 3]>,
    pub field_grid: Option<PointGrid>,
    #[serde(default = "default_directions")]
    pub far_field_directions: usize,
    #[serde(default)]
    pub thresholds: Option<ValidityThresholds>,
}

fn default_directions() -> usize {
    26
}

impl ScatterSection {
    pub fn probe_points(&self) -> Vec<Point> {
        to_points(&self.probes)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterConfig {
    pub wave: WaveSection,
    pub cloud: CloudSection,
    pub scatter: ScatterSection,
}

// ---- homogenize ----

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogenizeSection {
    /// Cell side of the limiting-equation grid.
    pub grid_side: f64,
    #[serde(default)]
    pub solver: SolverChoice,
    /// Adds the local term `-c W A` with this coefficient.
    pub self_term: Option<f64>,
    pub probes: Vec<[f64; 3]>,
    /// Particle sizes of the convergence study (empty to skip it).
    #[serde(default)]
    pub sweep_a: Vec<f64>,
    /// Compares the reduced cloud matrix with the limit matrix on the
    /// cloud's cube partition.
    #[serde(default)]
    pub check_riemann_sum: bool,
}

impl HomogenizeSection {
    pub fn probe_points(&self) -> Vec<Point> {
        to_points(&self.probes)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogenizeConfig {
    pub wave: WaveSection,
    pub cloud: CloudSection,
    pub homogenize: HomogenizeSection,
}

// ---- design ----

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DesignTarget {
    RefractionIndex,
    Permeability,
}

/// Target value over the design grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetProfile {
    Constant {
        value: ComplexInput,
    },
    /// Complex profile in the same notation as `impedance`.
    Profile {
        profile: Profile<Complex64>,
    },
    /// `n = -1.5 - 0.001i`: a negative-refraction medium with small loss.
    NegativeRefraction,
}

pub const NEGATIVE_REFRACTION_TARGET: Complex64 = Complex64::new(-1.5, -1e-3);

impl TargetProfile {
    pub fn at(&self, x: &Point) -> Complex64 {
        match self {
            TargetProfile::Constant { value } => (*value).into(),
            TargetProfile::Profile { profile } => profile.at(x),
            TargetProfile::NegativeRefraction => NEGATIVE_REFRACTION_TARGET,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub domain: DomainBox,
    pub grid_side: f64,
    pub density: Profile<f64>,
    #[serde(default = "default_shape")]
    pub shape: ShapeSpec,
    pub target: DesignTarget,
    pub value: TargetProfile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub wave: WaveSection,
    pub design: DesignSection,
}

/// Reads and parses a configuration file.
pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::ReadConfig { path: path.display().to_string(), source: e })?;
    toml::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))
}
