//! Scenario files and initial-data presets.
//!
//! A scenario is a TOML document with the sections `geometry`, `mesh`,
//! `eos`, `initial`, `solid`, `fluid`, `coupling` and `run`. Only
//! `geometry`, `eos` and `initial.preset` are mandatory; every other key has
//! a default:
//!
//! ```text
//! [geometry]  dim = 2, r_s = 0.5, R_o = 2.0, R0 = 0.3, offset = [0, 0]
//! [mesh]      N_r = 32, N_theta = 64, N_phi = 16 (3D only)
//! [eos]       gamma = 1.4, kappa = 1, c_v = 1, p_min = 0.01, p_max = 100, s_min = -10, s_max = 10
//! [initial]   preset = rest | acoustic-pulse | push | spin
//!             p_ref = 1, s_ref = 0, amplitude = 0.05, width = 0.15,
//!             center = (r_s + R_o)/2, gradient = 0.1
//! [solid]     rho_S = 1, l0 = [0, 0], omega0 = 0 (scalar in 2D, 3-vector in 3D)
//! [fluid]     cfl = 0.4, eps = 0, compat_order = 2, limiter = "llf"
//! [coupling]  mode = "subiterated-step", window = 0.05, picard_tol = 1e-10, picard_max = 50
//! [run]       t_end = 1, dt = CFL-limited, output_every = 0.1, snapshot_every = none,
//!             out_dir = "out", det_floor = 1e-3
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coupling::{CouplingConfig, CouplingMode, Model};
use crate::eos::{EosParams, HyperbolicityBox};
use crate::error::{Error, Result};
use crate::fluid::{compatibility_derivatives, CompatMoment, FluidField, FluidParams, Limiter, Regularization};
use crate::geometry::{build_mesh, DomainSpec, Mesh, Resolution};
use crate::kinematics::SolidVelocity;
use crate::solid::mass_properties;
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub geometry: GeometrySection,
    #[serde(default)]
    pub mesh: MeshSection,
    pub eos: EosSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub solid: SolidSection,
    #[serde(default)]
    pub fluid: FluidSection,
    #[serde(default)]
    pub coupling: CouplingSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    #[serde(default = "defaults::dim")]
    pub dim: usize,
    #[serde(default = "defaults::r_s")]
    pub r_s: f64,
    #[serde(rename = "R_o", default = "defaults::r_o")]
    pub r_o: f64,
    #[serde(rename = "R0", default = "defaults::r0")]
    pub r0: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub offset: Vec<f64>,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            dim: 2,
            r_s: 0.5,
            r_o: 2.0,
            r0: 0.3,
            offset: vec![],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    #[serde(rename = "N_r", default = "defaults::n_r")]
    pub n_r: usize,
    #[serde(rename = "N_theta", default = "defaults::n_theta")]
    pub n_theta: usize,
    #[serde(rename = "N_phi", default, skip_serializing_if = "Option::is_none")]
    pub n_phi: Option<usize>,
}

impl Default for MeshSection {
    fn default() -> Self {
        Self {
            n_r: 32,
            n_theta: 64,
            n_phi: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EosSection {
    #[serde(default = "defaults::gamma")]
    pub gamma: f64,
    #[serde(default = "defaults::one")]
    pub kappa: f64,
    #[serde(default = "defaults::one")]
    pub c_v: f64,
    #[serde(default = "defaults::p_min")]
    pub p_min: f64,
    #[serde(default = "defaults::p_max")]
    pub p_max: f64,
    #[serde(default = "defaults::s_min")]
    pub s_min: f64,
    #[serde(default = "defaults::s_max")]
    pub s_max: f64,
}

impl Default for EosSection {
    fn default() -> Self {
        let b = HyperbolicityBox::default();
        Self {
            gamma: 1.4,
            kappa: 1.0,
            c_v: 1.0,
            p_min: b.p_min,
            p_max: b.p_max,
            s_min: b.s_min,
            s_max: b.s_max,
        }
    }
}

/// Named initial fluid fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Uniform `(p_ref, 0, s_ref)`.
    Rest,
    /// Radial Gaussian `p_ref(1 + amplitude·exp(−((r − center)/width)²))`.
    /// With the defaults the bump is below `1e-10` at both walls, so the data
    /// are compatible to roundoff.
    AcousticPulse,
    /// `p_ref(1 + gradient·x₁)`.
    Push,
    /// Quiescent fluid around a spinning body (`solid.omega0 ≠ 0`).
    Spin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub preset: Preset,
    #[serde(default = "defaults::one")]
    pub p_ref: f64,
    #[serde(default)]
    pub s_ref: f64,
    #[serde(default = "defaults::amplitude")]
    pub amplitude: f64,
    #[serde(default = "defaults::width")]
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default = "defaults::gradient")]
    pub gradient: f64,
}

impl InitialSection {
    pub fn new(preset: Preset) -> Self {
        Self {
            preset,
            p_ref: 1.0,
            s_ref: 0.0,
            amplitude: defaults::amplitude(),
            width: defaults::width(),
            center: None,
            gradient: defaults::gradient(),
        }
    }
}

/// Angular velocity: a scalar in 2D, a 3-vector in 3D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngularVelocity {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Default for AngularVelocity {
    fn default() -> Self {
        AngularVelocity::Scalar(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolidSection {
    #[serde(rename = "rho_S", default = "defaults::one")]
    pub rho_s: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub l0: Vec<f64>,
    #[serde(default)]
    pub omega0: AngularVelocity,
}

impl Default for SolidSection {
    fn default() -> Self {
        Self {
            rho_s: 1.0,
            l0: vec![],
            omega0: AngularVelocity::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidSection {
    #[serde(default = "defaults::cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub eps: f64,
    #[serde(default = "defaults::compat_order")]
    pub compat_order: usize,
    #[serde(default)]
    pub limiter: Limiter,
}

impl Default for FluidSection {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            eps: 0.0,
            compat_order: 2,
            limiter: Limiter::Llf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    #[serde(default)]
    pub mode: CouplingMode,
    #[serde(default = "defaults::window")]
    pub window: f64,
    #[serde(default = "defaults::picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "defaults::picard_max")]
    pub picard_max: usize,
}

impl Default for CouplingSection {
    fn default() -> Self {
        let c = CouplingConfig::default();
        Self {
            mode: c.mode,
            window: c.window,
            picard_tol: c.picard_tol,
            picard_max: c.picard_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "defaults::one")]
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "defaults::output_every")]
    pub output_every: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<f64>,
    #[serde(default = "defaults::out_dir")]
    pub out_dir: String,
    #[serde(default = "defaults::det_floor")]
    pub det_floor: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            dt: None,
            output_every: 0.1,
            snapshot_every: None,
            out_dir: defaults::out_dir(),
            det_floor: defaults::det_floor(),
        }
    }
}

mod defaults {
    pub fn dim() -> usize {
        2
    }
    pub fn r_s() -> f64 {
        0.5
    }
    pub fn r_o() -> f64 {
        2.0
    }
    pub fn r0() -> f64 {
        0.3
    }
    pub fn n_r() -> usize {
        32
    }
    pub fn n_theta() -> usize {
        64
    }
    pub fn gamma() -> f64 {
        1.4
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn p_min() -> f64 {
        1e-2
    }
    pub fn p_max() -> f64 {
        1e2
    }
    pub fn s_min() -> f64 {
        -10.0
    }
    pub fn s_max() -> f64 {
        10.0
    }
    pub fn amplitude() -> f64 {
        0.05
    }
    pub fn width() -> f64 {
        0.15
    }
    pub fn gradient() -> f64 {
        0.1
    }
    pub fn cfl() -> f64 {
        0.4
    }
    pub fn compat_order() -> usize {
        2
    }
    pub fn window() -> f64 {
        0.05
    }
    pub fn picard_tol() -> f64 {
        1e-10
    }
    pub fn picard_max() -> usize {
        50
    }
    pub fn output_every() -> f64 {
        0.1
    }
    pub fn out_dir() -> String {
        "out".into()
    }
    pub fn det_floor() -> f64 {
        1e-3
    }
}

/// Run controls extracted from a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RunControls {
    pub t_end: f64,
    pub dt: Option<f64>,
    pub output_every: f64,
    pub snapshot_every: Option<f64>,
    pub out_dir: String,
}

/// A validated scenario turned into solver objects.
#[derive(Debug, Clone)]
pub struct Setup {
    pub model: Model,
    pub u0: FluidField,
    pub theta0: SolidVelocity,
    /// `𝓘⁰..𝓘ᴷ` of the initial data.
    pub moments: Vec<CompatMoment>,
    pub coupling: CouplingConfig,
    pub controls: RunControls,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn vector(values: &[f64], dim: usize, key: &str) -> Result<Vec3> {
    match values.len() {
        0 => Ok(Vec3::zeros()),
        n if n == dim => {
            let mut v = Vec3::zeros();
            for (i, x) in values.iter().enumerate() {
                v[i] = *x;
            }
            Ok(v)
        }
        n => Err(Error::Validation(format!(
            "{key} must have {dim} components (got {n})"
        ))),
    }
}

impl Scenario {
    /// A scenario with every optional section at its default.
    pub fn preset(preset: Preset) -> Self {
        Self {
            geometry: GeometrySection::default(),
            mesh: MeshSection::default(),
            eos: EosSection::default(),
            initial: InitialSection::new(preset),
            solid: SolidSection::default(),
            fluid: FluidSection::default(),
            coupling: CouplingSection::default(),
            run: RunSection::default(),
        }
    }

    /// Parse and validate TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map_or(1, |s| line_of(text, s.start)),
            message: e.message().trim().to_string(),
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        let g = &self.geometry;
        Ok(DomainSpec {
            dim: g.dim,
            r_s: g.r_s,
            r_o: g.r_o,
            r0: g.r0,
            offset: vector(&g.offset, g.dim, "geometry.offset")?,
        })
    }

    pub fn resolution(&self) -> Resolution {
        let m = &self.mesh;
        if self.geometry.dim == 3 {
            Resolution::spatial(m.n_r, m.n_theta, m.n_phi.unwrap_or(16))
        } else {
            Resolution::planar(m.n_r, m.n_theta)
        }
    }

    pub fn set_resolution(&mut self, res: Resolution) {
        self.mesh.n_r = res.n_r;
        self.mesh.n_theta = res.n_theta;
        self.mesh.n_phi = (self.geometry.dim == 3).then_some(res.n_phi);
    }

    pub fn eos_params(&self) -> EosParams {
        EosParams {
            gamma: self.eos.gamma,
            kappa: self.eos.kappa,
            c_v: self.eos.c_v,
        }
    }

    pub fn bounds(&self) -> HyperbolicityBox {
        HyperbolicityBox {
            p_min: self.eos.p_min,
            p_max: self.eos.p_max,
            s_min: self.eos.s_min,
            s_max: self.eos.s_max,
        }
    }

    pub fn fluid_params(&self) -> FluidParams {
        FluidParams {
            eos: self.eos_params(),
            bounds: self.bounds(),
            cfl: self.fluid.cfl,
            limiter: self.fluid.limiter,
        }
    }

    pub fn coupling_config(&self) -> CouplingConfig {
        let c = &self.coupling;
        CouplingConfig {
            mode: c.mode,
            window: c.window,
            picard_tol: c.picard_tol,
            picard_max: c.picard_max,
        }
    }

    pub fn theta0(&self) -> Result<SolidVelocity> {
        let dim = self.geometry.dim;
        let l = vector(&self.solid.l0, dim, "solid.l0")?;
        let w = match (&self.solid.omega0, dim) {
            (AngularVelocity::Scalar(w), 2) => Vec3::new(0.0, 0.0, *w),
            (AngularVelocity::Vector(v), 3) => vector(v, 3, "solid.omega0")?,
            (AngularVelocity::Scalar(w), _) if *w == 0.0 => Vec3::zeros(),
            _ => {
                return Err(Error::Validation(
                    "solid.omega0 must be a scalar in 2D and a 3-vector in 3D".into(),
                ))
            }
        };
        Ok(SolidVelocity::new(l, w))
    }

    /// Check every documented constraint.
    pub fn validate(&self) -> Result<()> {
        let spec = self.domain()?;
        spec.validate()?;
        let m = &self.mesh;
        if m.n_r < 8 || m.n_theta < 8 {
            return Err(Error::Validation(format!(
                "mesh.N_r and mesh.N_theta must be >= 8 (got {} x {})",
                m.n_r, m.n_theta
            )));
        }
        if spec.dim == 3 {
            let n_phi = self.resolution().n_phi;
            if n_phi < 8 || n_phi % 2 != 0 {
                return Err(Error::Validation(format!(
                    "mesh.N_phi must be even and >= 8 (got {n_phi})"
                )));
            }
        } else if m.n_phi.is_some() {
            return Err(Error::Validation("mesh.N_phi is only valid when dim = 3".into()));
        }
        self.fluid_params().validate()?;
        if !(0.0..=1.0).contains(&self.fluid.eps) {
            return Err(Error::Validation(format!(
                "fluid.eps must lie in [0, 1] (got {})",
                self.fluid.eps
            )));
        }
        if self.fluid.compat_order > 2 {
            return Err(Error::Validation(format!(
                "fluid.compat_order must be <= 2 (got {})",
                self.fluid.compat_order
            )));
        }
        if !(self.solid.rho_s > 0.0) {
            return Err(Error::Validation(format!(
                "solid.rho_S must be > 0 (got {})",
                self.solid.rho_s
            )));
        }
        let theta = self.theta0()?;
        self.coupling_config().validate()?;
        let i = &self.initial;
        if !(i.p_ref > 0.0) {
            return Err(Error::Validation(format!(
                "initial.p_ref must be > 0 (got {})",
                i.p_ref
            )));
        }
        if !(i.width > 0.0) {
            return Err(Error::Validation(format!(
                "initial.width must be > 0 (got {})",
                i.width
            )));
        }
        if i.preset == Preset::Spin && theta.omega_bar == Vec3::zeros() {
            return Err(Error::Validation("preset spin requires solid.omega0 != 0".into()));
        }
        let r = &self.run;
        if !(r.t_end >= 0.0) {
            return Err(Error::Validation(format!("run.t_end must be >= 0 (got {})", r.t_end)));
        }
        if !(r.output_every > 0.0) {
            return Err(Error::Validation(format!(
                "run.output_every must be > 0 (got {})",
                r.output_every
            )));
        }
        if let Some(dt) = r.dt {
            if !(dt > 0.0) {
                return Err(Error::Validation(format!("run.dt must be > 0 (got {dt})")));
            }
        }
        if let Some(every) = r.snapshot_every {
            if !(every > 0.0) {
                return Err(Error::Validation(format!(
                    "run.snapshot_every must be > 0 (got {every})"
                )));
            }
        }
        if !(r.det_floor > 0.0 && r.det_floor < 1.0) {
            return Err(Error::Validation(format!(
                "run.det_floor must lie in (0, 1) (got {})",
                r.det_floor
            )));
        }
        Ok(())
    }

    /// Initial fluid fields of the preset on `mesh`.
    pub fn initial_fields(&self, mesh: &Mesh) -> FluidField {
        let i = &self.initial;
        let n = mesh.num_nodes();
        let mut u = FluidField::uniform(n, i.p_ref, Vec3::zeros(), i.s_ref);
        match i.preset {
            Preset::Rest | Preset::Spin => {}
            Preset::AcousticPulse => {
                let center = i.center.unwrap_or(0.5 * (self.geometry.r_s + self.geometry.r_o));
                for (k, x) in mesh.positions().iter().enumerate() {
                    let z = (x.norm() - center) / i.width;
                    u.p[k] = i.p_ref * (1.0 + i.amplitude * (-z * z).exp());
                }
            }
            Preset::Push => {
                for (k, x) in mesh.positions().iter().enumerate() {
                    u.p[k] = i.p_ref * (1.0 + i.gradient * x.x);
                }
            }
        }
        u
    }

    /// Validate and build the mesh, initial data and solver objects.
    pub fn build(&self) -> Result<Setup> {
        self.validate()?;
        let spec = self.domain()?;
        let mesh = build_mesh(&spec, self.resolution())?;
        let params = self.fluid_params();
        let props = mass_properties(self.solid.rho_s, &spec)?;
        let theta0 = self.theta0()?;
        let u0 = self.initial_fields(&mesh);
        u0.check_box(&params.bounds)
            .map_err(|e| Error::Validation(format!("initial data: {e}")))?;
        let moments = compatibility_derivatives(&u0, &theta0, &mesh, &params, &props, self.fluid.compat_order)?;
        let reg = Regularization::new(self.fluid.eps, &mesh, moments.iter().map(|m| m.u.clone()).collect())?;
        Ok(Setup {
            model: Model {
                mesh,
                params,
                props,
                reg,
                det_floor: self.run.det_floor,
            },
            u0,
            theta0,
            moments,
            coupling: self.coupling_config(),
            controls: RunControls {
                t_end: self.run.t_end,
                dt: self.run.dt,
                output_every: self.run.output_every,
                snapshot_every: self.run.snapshot_every,
                out_dir: self.run.out_dir.clone(),
            },
        })
    }
}

/// Read, parse and validate a scenario file.
pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Scenario::from_toml_str(&text)
}
