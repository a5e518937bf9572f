//! Rigid-body properties, boundary pressure loads and the `Θ` ODE.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{surface_integral, DomainSpec, Mesh};
use crate::kinematics::SolidVelocity;
use crate::{Mat3, Vec3};

/// Inertia about the centre of mass: a scalar for planar bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inertia {
    Planar(f64),
    Spatial(Mat3),
}

impl Inertia {
    pub fn apply(&self, w: &Vec3) -> Vec3 {
        match self {
            Inertia::Planar(j) => Vec3::new(0.0, 0.0, j * w.z),
            Inertia::Spatial(m) => m * w,
        }
    }

    pub fn solve(&self, b: &Vec3) -> Vec3 {
        match self {
            Inertia::Planar(j) => Vec3::new(0.0, 0.0, b.z / j),
            Inertia::Spatial(m) => m.try_inverse().expect("inertia tensor is SPD") * b,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Inertia::Planar(j) if *j > 0.0 => Ok(()),
            Inertia::Spatial(m) => {
                if (m - m.transpose()).norm() > 1e-12 * m.norm()
                    || m.symmetric_eigenvalues().min() <= 0.0
                {
                    Err(Error::InvalidParameter("J0 must be symmetric positive-definite".into()))
                } else {
                    Ok(())
                }
            }
            _ => Err(Error::InvalidParameter("J0 must be positive".into())),
        }
    }
}

/// Mass, inertia and density of the body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyProps {
    pub body_mass: f64,
    pub j0: Inertia,
    pub rho_s: f64,
}

impl BodyProps {
    /// `m|l̄|² + J₀ω̄·ω̄`.
    pub fn quadratic_form(&self, theta: &SolidVelocity) -> f64 {
        self.body_mass * theta.l_bar.norm_squared() + self.j0.apply(&theta.omega_bar).dot(&theta.omega_bar)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.body_mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "body mass must be positive (got {})",
                self.body_mass
            )));
        }
        self.j0.validate()
    }
}

/// Closed-form mass properties of a homogeneous disk or ball.
pub fn mass_properties(rho_s: f64, spec: &DomainSpec) -> Result<BodyProps> {
    if !(rho_s > 0.0) || !rho_s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "solid density must be positive (got {rho_s})"
        )));
    }
    let r = spec.r_s;
    Ok(if spec.dim == 2 {
        BodyProps {
            body_mass: rho_s * PI * r * r,
            j0: Inertia::Planar(0.5 * rho_s * PI * r.powi(4)),
            rho_s,
        }
    } else {
        let m = 4.0 / 3.0 * rho_s * PI * r.powi(3);
        BodyProps {
            body_mass: m,
            j0: Inertia::Spatial(Mat3::identity() * (0.4 * m * r * r)),
            rho_s,
        }
    })
}

/// Pressure force and torque (about the reference origin) on the body.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Load {
    pub force: Vec3,
    pub torque: Vec3,
}

impl Load {
    pub fn lerp(&self, other: &Load, s: f64) -> Load {
        Load {
            force: self.force + (other.force - self.force) * s,
            torque: self.torque + (other.torque - self.torque) * s,
        }
    }
}

/// `∮ p̄ n₀ dΓ` and `∮ x × p̄ n₀ dΓ` over the SOLID patch.
pub fn surface_load(p_trace: &[f64], mesh: &Mesh) -> Result<Load> {
    let patch = mesh.solid_patch();
    if p_trace.len() != patch.len() {
        return Err(Error::Shape {
            expected: patch.len(),
            got: p_trace.len(),
        });
    }
    // ∮ n₀ dΓ = 0 and ∮ x × n₀ dΓ = 0: measure against the first face value.
    let p_ref = p_trace.first().copied().unwrap_or(0.0);
    let pn: Vec<Vec3> = patch.normals.iter().zip(p_trace).map(|(n, p)| n * (*p - p_ref)).collect();
    let xpn: Vec<Vec3> = patch.positions.iter().zip(&pn).map(|(x, f)| x.cross(f)).collect();
    Ok(Load {
        force: surface_integral(patch, &pn)?,
        torque: surface_integral(patch, &xpn)?,
    })
}

/// Right side of the body-frame Newton-Euler equations:
/// `l̄' = l̄ × ω̄ + f/m`, `J₀ω̄' = (J₀ω̄) × ω̄ + τ`.
pub fn solid_rate(theta: &SolidVelocity, load: &Load, props: &BodyProps) -> SolidVelocity {
    let l = theta.l_bar.cross(&theta.omega_bar) + load.force / props.body_mass;
    let jw = props.j0.apply(&theta.omega_bar);
    let w = props.j0.solve(&(jw.cross(&theta.omega_bar) + load.torque));
    SolidVelocity::new(l, w)
}

/// One RK4 step of the body ODE with a time-dependent load.
pub fn advance_solid(
    theta: &SolidVelocity,
    load_sampler: impl Fn(f64) -> Load,
    props: &BodyProps,
    t: f64,
    dt: f64,
) -> SolidVelocity {
    let mid = load_sampler(t + 0.5 * dt);
    let k1 = solid_rate(theta, &load_sampler(t), props);
    let k2 = solid_rate(&(*theta + k1 * (0.5 * dt)), &mid, props);
    let k3 = solid_rate(&(*theta + k2 * (0.5 * dt)), &mid, props);
    let k4 = solid_rate(&(*theta + k3 * dt), &load_sampler(t + dt), props);
    *theta + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}
