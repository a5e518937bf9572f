//! Solid velocity `Θ = (l̄, ω̄)` and the configuration block
//! `Υ = (h, φ, 𝒥₁, 𝒥₂, Q)` generated by the cut-off rigid field.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Cutoff, DomainSpec, Mesh};
use crate::{Mat3, Vec3};

/// Default lower bound on `det 𝒥₁` before the flow map is declared degenerate.
pub const DEFAULT_DET_FLOOR: f64 = 1e-3;

/// Body-frame translational and angular velocity. Planar runs use the `z`
/// component of `omega_bar` only.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolidVelocity {
    pub l_bar: Vec3,
    pub omega_bar: Vec3,
}

impl SolidVelocity {
    pub fn new(l_bar: Vec3, omega_bar: Vec3) -> Self {
        Self { l_bar, omega_bar }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_finite(&self) -> bool {
        self.l_bar.iter().chain(self.omega_bar.iter()).all(|v| v.is_finite())
    }

    /// Max-norm over all six components.
    pub fn max_abs(&self) -> f64 {
        self.l_bar
            .iter()
            .chain(self.omega_bar.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn distance(&self, other: &SolidVelocity) -> f64 {
        (*self - *other).max_abs()
    }

    /// Rigid velocity `l̄ + ω̄ × x` in the body frame.
    pub fn rigid_velocity(&self, x: &Vec3) -> Vec3 {
        self.l_bar + self.omega_bar.cross(x)
    }
}

impl std::ops::Add for SolidVelocity {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.l_bar + o.l_bar, self.omega_bar + o.omega_bar)
    }
}

impl std::ops::Sub for SolidVelocity {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.l_bar - o.l_bar, self.omega_bar - o.omega_bar)
    }
}

impl std::ops::Mul<f64> for SolidVelocity {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.l_bar * s, self.omega_bar * s)
    }
}

/// `Θ` as a function of time.
pub trait ThetaSampler {
    fn sample(&self, t: f64) -> SolidVelocity;
}

impl<F: Fn(f64) -> SolidVelocity> ThetaSampler for F {
    fn sample(&self, t: f64) -> SolidVelocity {
        self(t)
    }
}

impl ThetaSampler for SolidVelocity {
    fn sample(&self, _t: f64) -> SolidVelocity {
        *self
    }
}

/// Second derivatives of a vector field: `hess[i]` is the Hessian of component `i`.
pub type Tensor3 = [Mat3; 3];

pub fn tensor_zero() -> Tensor3 {
    [Mat3::zeros(); 3]
}

/// Flow-map configuration on the mesh nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub h: Vec3,
    pub q: Mat3,
    pub phi: Vec<Vec3>,
    pub j1: Vec<Mat3>,
    pub j2: Vec<Tensor3>,
}

impl Configuration {
    /// `h = 0`, `φ = id`, `𝒥₁ = I`, `𝒥₂ = 0`, `Q = I`.
    pub fn initial(mesh: &Mesh) -> Self {
        Self {
            h: Vec3::zeros(),
            q: Mat3::identity(),
            phi: mesh.positions().to_vec(),
            j1: vec![Mat3::identity(); mesh.num_nodes()],
            j2: vec![tensor_zero(); mesh.num_nodes()],
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.phi.len()
    }

    /// World-frame translational and angular velocity.
    pub fn rigid_motion(&self, theta: &SolidVelocity) -> RigidMotion {
        RigidMotion {
            h: self.h,
            l: self.q * theta.l_bar,
            omega: self.q * theta.omega_bar,
        }
    }
}

/// Rigid velocity field `u_S(y) = l + ω × (y − h)` in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    pub h: Vec3,
    pub l: Vec3,
    pub omega: Vec3,
}

/// `V`, `∇V` and `∇²V` at a point.
#[derive(Debug, Clone, Copy)]
pub struct VelocityJet {
    pub v: Vec3,
    pub grad: Mat3,
    pub hess: Tensor3,
}

pub(crate) fn skew(w: &Vec3) -> Mat3 {
    Mat3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

impl RigidMotion {
    pub fn velocity(&self, cutoff: &Cutoff, y: &Vec3) -> Vec3 {
        let chi = cutoff.value(y);
        if chi == 0.0 {
            return Vec3::zeros();
        }
        (self.l + self.omega.cross(&(y - self.h))) * chi
    }

    /// Analytic jet of `V = χ·u_S`.
    pub fn jet(&self, cutoff: &Cutoff, y: &Vec3) -> VelocityJet {
        let c = cutoff.jet(y);
        if c.value == 0.0 {
            return VelocityJet {
                v: Vec3::zeros(),
                grad: Mat3::zeros(),
                hess: tensor_zero(),
            };
        }
        let w = self.l + self.omega.cross(&(y - self.h));
        let big_w = skew(&self.omega);
        let grad = w * c.grad.transpose() + big_w * c.value;
        let mut hess = tensor_zero();
        for (i, h) in hess.iter_mut().enumerate() {
            let row = big_w.row(i).transpose();
            *h = c.hess * w[i] + c.grad * row.transpose() + row * c.grad.transpose();
        }
        VelocityJet {
            v: w * c.value,
            grad,
            hess,
        }
    }
}

/// `V(y) = χ(y)·(Q l̄ + (Q ω̄) × (y − h))`.
pub fn transport_velocity(
    theta: &SolidVelocity,
    conf: &Configuration,
    spec: &DomainSpec,
    y: &Vec3,
) -> Vec3 {
    conf.rigid_motion(theta).velocity(&spec.cutoff(), y)
}

/// `ū_S = l̄ + ω̄ × x` at a point of the reference solid boundary.
pub fn solid_boundary_velocity(theta: &SolidVelocity, spec: &DomainSpec, x: &Vec3) -> Result<Vec3> {
    if (x.norm() - spec.r_s).abs() > 1e-9 * spec.r_s.max(1.0) {
        return Err(Error::NotOnPatch("SOLID"));
    }
    Ok(theta.rigid_velocity(x))
}

/// `M = 𝒥₁ᵀ𝒥₁` at a node.
pub fn metric(conf: &Configuration, node: usize) -> Result<Mat3> {
    let j1 = &conf.j1[node];
    let det = j1.determinant();
    if det.abs() < 1e-14 {
        return Err(Error::Degenerate {
            node,
            det,
            floor: 1e-14,
        });
    }
    Ok(j1.transpose() * j1)
}

/// Nearest rotation by polar decomposition.
pub fn project_to_rotation(q: &Mat3) -> Mat3 {
    let svd = q.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        let mut d = Mat3::identity();
        d[(2, 2)] = -1.0;
        r = u * d * vt;
    }
    r
}

#[derive(Clone, Copy)]
struct NodeState {
    phi: Vec3,
    j1: Mat3,
    j2: Tensor3,
}

impl NodeState {
    fn axpy(&self, d: &NodeState, s: f64) -> NodeState {
        NodeState {
            phi: self.phi + d.phi * s,
            j1: self.j1 + d.j1 * s,
            j2: [
                self.j2[0] + d.j2[0] * s,
                self.j2[1] + d.j2[1] * s,
                self.j2[2] + d.j2[2] * s,
            ],
        }
    }
}

fn node_rate(motion: &RigidMotion, cutoff: &Cutoff, s: &NodeState) -> NodeState {
    let jet = motion.jet(cutoff, &s.phi);
    let mut j2 = tensor_zero();
    for (i, out) in j2.iter_mut().enumerate() {
        let mut acc = s.j1.transpose() * jet.hess[i] * s.j1;
        for l in 0..3 {
            let g = jet.grad[(i, l)];
            if g != 0.0 {
                acc += s.j2[l] * g;
            }
        }
        *out = acc;
    }
    NodeState {
        phi: jet.v,
        j1: jet.grad * s.j1,
        j2,
    }
}

/// One RK4 step of the `Υ` block; `Q` is re-projected onto SO afterwards.
pub fn advance_configuration(
    conf: &Configuration,
    spec: &DomainSpec,
    theta: &impl ThetaSampler,
    t: f64,
    dt: f64,
) -> Result<Configuration> {
    advance_configuration_with_floor(conf, spec, theta, t, dt, DEFAULT_DET_FLOOR)
}

pub fn advance_configuration_with_floor(
    conf: &Configuration,
    spec: &DomainSpec,
    theta: &impl ThetaSampler,
    t: f64,
    dt: f64,
    det_floor: f64,
) -> Result<Configuration> {
    let cutoff = spec.cutoff();
    let thetas = [
        theta.sample(t),
        theta.sample(t + 0.5 * dt),
        theta.sample(t + 0.5 * dt),
        theta.sample(t + dt),
    ];
    // Stage values of (h, Q); the node ODEs are driven by the rigid motion
    // they define, which makes the whole block a single joint RK4 step.
    let mut hs = [conf.h; 4];
    let mut qs = [conf.q; 4];
    let mut dh = [Vec3::zeros(); 4];
    let mut dq = [Mat3::zeros(); 4];
    for s in 0..4 {
        if s > 0 {
            let c = if s == 3 { dt } else { 0.5 * dt };
            hs[s] = conf.h + dh[s - 1] * c;
            qs[s] = conf.q + dq[s - 1] * c;
        }
        dh[s] = qs[s] * thetas[s].l_bar;
        dq[s] = qs[s] * skew(&thetas[s].omega_bar);
    }
    let motions: Vec<RigidMotion> = (0..4)
        .map(|s| RigidMotion {
            h: hs[s],
            l: qs[s] * thetas[s].l_bar,
            omega: qs[s] * thetas[s].omega_bar,
        })
        .collect();
    let h = conf.h + (dh[0] + dh[1] * 2.0 + dh[2] * 2.0 + dh[3]) * (dt / 6.0);
    let q = project_to_rotation(&(conf.q + (dq[0] + dq[1] * 2.0 + dq[2] * 2.0 + dq[3]) * (dt / 6.0)));

    let moving = motions
        .iter()
        .any(|m| m.l.norm() > 0.0 || m.omega.norm() > 0.0);
    if !moving {
        return Ok(Configuration {
            h,
            q,
            ..conf.clone()
        });
    }

    let updated: Vec<NodeState> = (0..conf.num_nodes())
        .into_par_iter()
        .map(|n| {
            let y0 = NodeState {
                phi: conf.phi[n],
                j1: conf.j1[n],
                j2: conf.j2[n],
            };
            let k1 = node_rate(&motions[0], &cutoff, &y0);
            let k2 = node_rate(&motions[1], &cutoff, &y0.axpy(&k1, 0.5 * dt));
            let k3 = node_rate(&motions[2], &cutoff, &y0.axpy(&k2, 0.5 * dt));
            let k4 = node_rate(&motions[3], &cutoff, &y0.axpy(&k3, dt));
            y0.axpy(&k1, dt / 6.0)
                .axpy(&k2, dt / 3.0)
                .axpy(&k3, dt / 3.0)
                .axpy(&k4, dt / 6.0)
        })
        .collect();

    let mut out = Configuration {
        h,
        q,
        phi: Vec::with_capacity(updated.len()),
        j1: Vec::with_capacity(updated.len()),
        j2: Vec::with_capacity(updated.len()),
    };
    for (n, s) in updated.into_iter().enumerate() {
        let det = s.j1.determinant();
        if det < det_floor {
            return Err(Error::Degenerate {
                node: n,
                det,
                floor: det_floor,
            });
        }
        out.phi.push(s.phi);
        out.j1.push(s.j1);
        out.j2.push(s.j2);
    }
    Ok(out)
}

/// Consistency defects of a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigurationResiduals {
    /// `‖QᵀQ − I‖_F`.
    pub orthogonality: f64,
    /// Max over nodes of `‖D_h φ − 𝒥₁‖_F`.
    pub gradient: f64,
    /// Max over boundary-adjacent nodes of `‖M − I‖_F`.
    pub boundary_metric: f64,
}

pub fn configuration_residuals(conf: &Configuration, mesh: &Mesh) -> ConfigurationResiduals {
    let orthogonality = (conf.q.transpose() * conf.q - Mat3::identity()).norm();
    let disp: Vec<Vec3> = conf
        .phi
        .iter()
        .zip(mesh.positions())
        .map(|(p, x)| p - x)
        .collect();
    let mut planar = Mat3::identity();
    if mesh.dim() == 2 {
        planar[(2, 2)] = 0.0;
    }
    let gradient = (0..mesh.num_nodes())
        .map(|n| {
            let mut g = mesh.vector_gradient(&disp, n) + planar;
            if mesh.dim() == 2 {
                g[(2, 2)] = 1.0;
            }
            (g - conf.j1[n]).norm()
        })
        .fold(0.0, f64::max);
    let n_r = mesh.resolution().n_r;
    let boundary_metric = (0..mesh.num_nodes())
        .filter(|&n| {
            let i = mesh.radial_index(n);
            i <= 1 || i + 1 >= n_r
        })
        .map(|n| (conf.j1[n].transpose() * conf.j1[n] - Mat3::identity()).norm())
        .fold(0.0, f64::max);
    ConfigurationResiduals {
        orthogonality,
        gradient,
        boundary_metric,
    }
}
