//! Conormal energies, vorticity and entropy transport residuals, boundary
//! mismatch and compatibility residuals.

use crate::eos::ideal_coefficients;
use crate::error::{Error, Result};
use crate::fluid::{compatibility_derivatives, CompatMoment, FluidField, FluidParams, Frame, Regularization};
use crate::geometry::{Mesh, PatchTag};
use crate::kinematics::SolidVelocity;
use crate::solid::{solid_rate, surface_load, BodyProps};
use crate::{Mat3, Vec3};

/// One stored time level of the coupled solution.
#[derive(Debug, Clone, Copy)]
pub struct Level<'a> {
    pub t: f64,
    pub u: &'a FluidField,
    pub theta: SolidVelocity,
    /// Coefficients of the configuration at `t`.
    pub frame: &'a Frame,
}

/// Source of the time derivative used by the history-dependent diagnostics.
#[derive(Debug, Clone, Copy)]
pub enum History<'a> {
    /// The level one step earlier; derivatives are differenced.
    Previous(&'a Level<'a>),
    /// A known `∂ₜU` at the current level (e.g. `𝓘¹` at `t = 0`).
    Rate(&'a FluidField),
}

/// Diagnostics written once per output interval.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e0: f64,
    pub e1: f64,
    pub vort_res: f64,
    pub ent_res: f64,
    pub bc_mismatch: f64,
    /// Boundary defect of order `k` of the initial data, `k = 0..=K`.
    pub compat_res: Vec<f64>,
}

fn coefficients(params: &FluidParams, p: f64, s: f64) -> (f64, f64) {
    if p > 0.0 {
        let (alpha, eta, _) = ideal_coefficients(&params.eos, p, s);
        (alpha, eta)
    } else {
        (0.0, 0.0)
    }
}

// α⁻¹p² + η(Mu)·u + s², with α⁻¹p² read as 0 at p = 0.
fn quadratic(alpha: f64, eta: f64, metric: &Mat3, p: f64, u: &Vec3, s: f64) -> f64 {
    let pp = if alpha > 0.0 { p * p / alpha } else { 0.0 };
    pp + eta * (metric * u).dot(u) + s * s
}

fn fluid_energy(
    level: &Level,
    dp: &[f64],
    du: &[Vec3],
    ds: &[f64],
    mesh: &Mesh,
    params: &FluidParams,
) -> f64 {
    let w = mesh.node_weights();
    (0..mesh.num_nodes())
        .map(|n| {
            let (alpha, eta) = coefficients(params, level.u.p[n], level.u.s[n]);
            w[n] * quadratic(alpha, eta, &level.frame.nodes[n].metric, dp[n], &du[n], ds[n])
        })
        .sum()
}

fn solid_trace(u: &FluidField, mesh: &Mesh) -> Vec<f64> {
    mesh.solid_patch().nodes.iter().map(|&n| u.p[n]).collect()
}

fn time_rate(level: &Level, history: &History) -> Result<FluidField> {
    match history {
        History::Rate(r) => Ok((*r).clone()),
        History::Previous(prev) => {
            let dt = level.t - prev.t;
            if !(dt > 0.0) {
                return Err(Error::InsufficientHistory("previous level must be strictly earlier"));
            }
            Ok(level.u.lincomb(1.0 / dt, prev.u, -1.0 / dt))
        }
    }
}

/// Discrete conormal energy `E_{m,tan}` for `m ∈ {0, 1}`.
///
/// `m = 1` adds the fields `Z U` for `Z ∈ {∂ₜ, ∂_θ[, ∂_ψ], φ(z)∂_z}` with
/// `φ(z) = z/(1+z)` and `z` the distance to the nearer wall, and the solid
/// term built from the Newton-Euler right side.
pub fn conormal_energy(
    level: &Level,
    history: Option<&History>,
    mesh: &Mesh,
    params: &FluidParams,
    props: &BodyProps,
    order: usize,
) -> Result<f64> {
    let u = level.u;
    let mut e = fluid_energy(level, &u.p, &u.u, &u.s, mesh, params) + props.quadratic_form(&level.theta);
    match order {
        0 => return Ok(e),
        1 => {}
        _ => {
            return Err(Error::InvalidParameter(format!(
                "conormal order must be 0 or 1 (got {order})"
            )))
        }
    }
    let history = history.ok_or(Error::InsufficientHistory("E1 needs a previous level or a rate"))?;
    let rate = time_rate(level, history)?;
    e += fluid_energy(level, &rate.p, &rate.u, &rate.s, mesh, params);

    let n_nodes = mesh.num_nodes();
    for axis in 1..mesh.axes() {
        let dp: Vec<f64> = (0..n_nodes).map(|n| mesh.logical_derivative(&u.p, n, axis)).collect();
        let du: Vec<Vec3> = (0..n_nodes).map(|n| mesh.logical_derivative(&u.u, n, axis)).collect();
        let ds: Vec<f64> = (0..n_nodes).map(|n| mesh.logical_derivative(&u.s, n, axis)).collect();
        e += fluid_energy(level, &dp, &du, &ds, mesh, params);
    }
    let weight = |n: usize| {
        let z = mesh.wall_distance(n);
        let sign = if mesh.xi(n) <= 0.5 { 1.0 } else { -1.0 };
        sign * z / (1.0 + z) / mesh.radial_length(n)
    };
    let dp: Vec<f64> = (0..n_nodes).map(|n| mesh.logical_derivative(&u.p, n, 0) * weight(n)).collect();
    let du: Vec<Vec3> = (0..n_nodes).map(|n| mesh.logical_derivative(&u.u, n, 0) * weight(n)).collect();
    let ds: Vec<f64> = (0..n_nodes).map(|n| mesh.logical_derivative(&u.s, n, 0) * weight(n)).collect();
    e += fluid_energy(level, &dp, &du, &ds, mesh, params);

    let load = surface_load(&solid_trace(u, mesh), mesh)?;
    e += props.quadratic_form(&solid_rate(&level.theta, &load, props));
    Ok(e)
}

fn check_len(u: &FluidField, mesh: &Mesh) -> Result<()> {
    if u.len() != mesh.num_nodes() {
        return Err(Error::Shape {
            expected: mesh.num_nodes(),
            got: u.len(),
        });
    }
    Ok(())
}

// Axial vector `a_i = ε_ijk A_kj`.
fn axial(a: &Mat3) -> Vec3 {
    Vec3::new(a[(2, 1)] - a[(1, 2)], a[(0, 2)] - a[(2, 0)], a[(1, 0)] - a[(0, 1)])
}

struct VorticityTerms {
    w: Vec<Vec3>,
    /// `𝓡 − (ṽ·∇)w`.
    q: Vec<Vec3>,
}

/// `w = Curl(Mū)` and `𝓡 − (ṽ·∇)w` with `ṽ = ū − ū_S + ε(ηM)⁻¹ν`, where
///
/// ```text
/// 𝓡 = Curl(G) + η⁻²∇η × ∇p̄ − Curl⟨∇(Mū), ∇ṽ⟩
/// G = KᵀMū + ((v·∇)M)ū + η⁻¹F_u − M𝒥₁⁻¹𝒥₂[ū, v] + ε(((ηM)⁻¹ν·∇)(Mū) − η⁻¹(ν·∇)ū)
/// ```
fn vorticity_terms(level: &Level, mesh: &Mesh, params: &FluidParams, reg: &Regularization) -> VorticityTerms {
    let n_nodes = mesh.num_nodes();
    let u = level.u;
    let frame = level.frame;
    let eps = reg.eps;
    let nu = &reg.nu.nu;
    let source = reg.source(level.t);
    let eta: Vec<f64> = (0..n_nodes).map(|n| coefficients(params, u.p[n], u.s[n]).1).collect();
    let metric: Vec<Mat3> = frame.nodes.iter().map(|f| f.metric).collect();
    let m: Vec<Vec3> = (0..n_nodes).map(|n| metric[n] * u.u[n]).collect();
    let w: Vec<Vec3> = (0..n_nodes).map(|n| mesh.curl(&m, n)).collect();
    let shifted = |n: usize| -> Vec3 {
        let f = &frame.nodes[n];
        let mut v = u.u[n] - f.us;
        if eps != 0.0 && eta[n] > 0.0 {
            v += f.metric_inv * nu[n] * (eps / eta[n]);
        }
        v
    };
    let vt: Vec<Vec3> = (0..n_nodes).map(shifted).collect();

    let g: Vec<Vec3> = (0..n_nodes)
        .map(|n| {
            let f = &frame.nodes[n];
            let uu = u.u[n];
            let v = uu - f.us;
            let inv_eta = if eta[n] > 0.0 { 1.0 / eta[n] } else { 0.0 };
            let mut g = f.k.transpose() * m[n] - metric[n] * f.c_apply(&uu, &v);
            if !frame.trivial {
                let inv = mesh.inverse_chart(n);
                let mut dm = Mat3::zeros();
                for a in 0..mesh.axes() {
                    let speed = inv.row(a).transpose().dot(&v);
                    dm += mesh.logical_derivative(&metric, n, a) * speed;
                }
                g += dm * uu;
            }
            if let Some(src) = &source {
                g += src.u[n] * inv_eta;
            }
            if eps != 0.0 {
                let along = f.metric_inv * nu[n] * inv_eta;
                g += (mesh.vector_gradient(&m, n) * along - mesh.vector_gradient(&u.u, n) * nu[n] * inv_eta) * eps;
            }
            g
        })
        .collect();

    let q = (0..n_nodes)
        .map(|n| {
            let baro = if eta[n] > 0.0 {
                mesh.gradient(&eta, n).cross(&mesh.gradient(&u.p, n)) / (eta[n] * eta[n])
            } else {
                Vec3::zeros()
            };
            let commutator = axial(&(mesh.vector_gradient(&m, n) * mesh.vector_gradient(&vt, n)));
            let transport = mesh.vector_gradient(&w, n) * vt[n];
            mesh.curl(&g, n) + baro - commutator - transport
        })
        .collect();
    VorticityTerms { w, q }
}

fn interior_norm(r: &[Vec3], mesh: &Mesh) -> f64 {
    let n_r = mesh.resolution().n_r;
    let w = mesh.node_weights();
    (0..r.len())
        .filter(|&n| {
            let i = mesh.radial_index(n);
            i >= 2 && i + 2 <= n_r
        })
        .map(|n| w[n] * r[n].norm_squared())
        .sum::<f64>()
        .sqrt()
}

/// L² norm over the interior (wall layers and their neighbours excluded) of
/// `∂ₜCurl(Mū) + (ṽ·∇)Curl(Mū) − 𝓡`. With a previous level the time
/// derivative is differenced and the other terms are averaged over the two
/// levels.
pub fn vorticity_residual(
    level: &Level,
    history: &History,
    mesh: &Mesh,
    params: &FluidParams,
    reg: &Regularization,
) -> Result<f64> {
    check_len(level.u, mesh)?;
    let cur = vorticity_terms(level, mesh, params, reg);
    let r: Vec<Vec3> = match history {
        History::Previous(prev) => {
            check_len(prev.u, mesh)?;
            let dt = level.t - prev.t;
            if !(dt > 0.0) {
                return Err(Error::InsufficientHistory("previous level must be strictly earlier"));
            }
            let old = vorticity_terms(prev, mesh, params, reg);
            (0..mesh.num_nodes())
                .map(|n| (cur.w[n] - old.w[n]) / dt - (cur.q[n] + old.q[n]) * 0.5)
                .collect()
        }
        History::Rate(rate) => {
            check_len(rate, mesh)?;
            let dm: Vec<Vec3> = (0..mesh.num_nodes())
                .map(|n| {
                    let f = &level.frame.nodes[n];
                    let dmetric = f.metric * f.k + f.k.transpose() * f.metric;
                    dmetric * level.u.u[n] + f.metric * rate.u[n]
                })
                .collect();
            (0..mesh.num_nodes()).map(|n| mesh.curl(&dm, n) - cur.q[n]).collect()
        }
    };
    Ok(interior_norm(&r, mesh))
}

// `F_s − (ū − ū_S + εν)·∇s̄`.
fn entropy_terms(level: &Level, mesh: &Mesh, reg: &Regularization) -> Vec<f64> {
    let u = level.u;
    let source = reg.source(level.t);
    (0..mesh.num_nodes())
        .map(|n| {
            let mut v = u.u[n] - level.frame.nodes[n].us;
            if reg.eps != 0.0 {
                v += reg.nu.nu[n] * reg.eps;
            }
            let fs = source.as_ref().map_or(0.0, |f| f.s[n]);
            fs - v.dot(&mesh.gradient(&u.s, n))
        })
        .collect()
}

/// L² norm of `∂ₜs̄ + ((ū − ū_S + εν)·∇)s̄ − F_s` with the solver's stencils.
pub fn entropy_residual(level: &Level, history: &History, mesh: &Mesh, reg: &Regularization) -> Result<f64> {
    check_len(level.u, mesh)?;
    let cur = entropy_terms(level, mesh, reg);
    let r: Vec<f64> = match history {
        History::Previous(prev) => {
            check_len(prev.u, mesh)?;
            let dt = level.t - prev.t;
            if !(dt > 0.0) {
                return Err(Error::InsufficientHistory("previous level must be strictly earlier"));
            }
            let old = entropy_terms(prev, mesh, reg);
            (0..mesh.num_nodes())
                .map(|n| (level.u.s[n] - prev.u.s[n]) / dt - 0.5 * (cur[n] + old[n]))
                .collect()
        }
        History::Rate(rate) => {
            check_len(rate, mesh)?;
            (0..mesh.num_nodes()).map(|n| rate.s[n] - cur[n]).collect()
        }
    };
    Ok(mesh.l2_norm(&r))
}

/// Max over the boundary faces of the order-`k` defect
/// `𝓘ᵏ_u·n₀ − (𝓘ᵏ_l + 𝓘ᵏ_ω × x)·n₀` (SOLID) and `𝓘ᵏ_u·n₀` (OUTER), `k = 0..=K`.
pub fn compatibility_residual(
    u0: &FluidField,
    theta0: &SolidVelocity,
    mesh: &Mesh,
    params: &FluidParams,
    props: &BodyProps,
    order: usize,
) -> Result<Vec<f64>> {
    let moments = compatibility_derivatives(u0, theta0, mesh, params, props, order)?;
    Ok(boundary_defects(&moments, mesh))
}

/// Per-order boundary defects of precomputed time derivatives.
pub fn boundary_defects(moments: &[CompatMoment], mesh: &Mesh) -> Vec<f64> {
    moments
        .iter()
        .map(|mom| {
            let mut worst: f64 = 0.0;
            for tag in [PatchTag::Solid, PatchTag::Outer] {
                let patch = mesh.patch(tag);
                for (f, &n) in patch.nodes.iter().enumerate() {
                    let n0 = patch.normals[f];
                    let mut d = mom.u.u[n].dot(&n0);
                    if tag == PatchTag::Solid {
                        d -= mom.theta.rigid_velocity(&patch.positions[f]).dot(&n0);
                    }
                    worst = worst.max(d.abs());
                }
            }
            worst
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::spatial_residual;
    use crate::fluid::ResidualOptions;
    use crate::geometry::{build_mesh, DomainSpec, Resolution};
    use crate::kinematics::Configuration;
    use crate::solid::mass_properties;
    use std::f64::consts::PI;

    fn setup(n_r: usize, n_t: usize) -> (Mesh, FluidParams, BodyProps) {
        let spec = DomainSpec::default();
        let mesh = build_mesh(&spec, Resolution::planar(n_r, n_t)).unwrap();
        (mesh, FluidParams::default(), mass_properties(1.0, &spec).unwrap())
    }

    #[test]
    fn rest_energy_matches_area_over_gamma() {
        let (mesh, params, props) = setup(16, 32);
        let u = FluidField::uniform(mesh.num_nodes(), 1.0, Vec3::zeros(), 0.0);
        let frame = Frame::identity(&mesh, 0.0);
        let level = Level { t: 0.0, u: &u, theta: SolidVelocity::zero(), frame: &frame };
        let e0 = conormal_energy(&level, None, &mesh, &params, &props, 0).unwrap();
        assert!((e0 - PI * 3.75 / 1.4).abs() < 1e-10 * e0);
    }

    #[test]
    fn zero_fluid_keeps_entropy_and_solid_terms() {
        let (mesh, params, props) = setup(16, 32);
        let u = FluidField::uniform(mesh.num_nodes(), 0.0, Vec3::zeros(), 0.5);
        let frame = Frame::identity(&mesh, 0.0);
        let theta = SolidVelocity::new(Vec3::new(0.2, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0));
        let level = Level { t: 0.0, u: &u, theta, frame: &frame };
        let e0 = conormal_energy(&level, None, &mesh, &params, &props, 0).unwrap();
        let expect = 0.25 * mesh.total_volume() + props.quadratic_form(&theta);
        assert!((e0 - expect).abs() < 1e-12);
        let zero = FluidField::zeros(mesh.num_nodes());
        let level = Level { t: 0.0, u: &zero, theta: SolidVelocity::zero(), frame: &frame };
        assert_eq!(conormal_energy(&level, None, &mesh, &params, &props, 0).unwrap(), 0.0);
    }

    #[test]
    fn energy_is_invariant_under_rotated_configuration() {
        let (mesh, params, props) = setup(16, 32);
        let mut u = FluidField::uniform(mesh.num_nodes(), 1.1, Vec3::zeros(), 0.1);
        for (n, x) in mesh.positions().iter().enumerate() {
            u.u[n] = Vec3::new(-x.y, x.x, 0.0) * 0.1;
        }
        let theta = SolidVelocity::zero();
        let id = Frame::identity(&mesh, 0.0);
        let mut conf = Configuration::initial(&mesh);
        let (c, s) = (0.7f64.cos(), 0.7f64.sin());
        let q = Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
        conf.q = q;
        for n in 0..mesh.num_nodes() {
            conf.phi[n] = q * conf.phi[n];
            conf.j1[n] = q;
        }
        let rotated = Frame::new(&mesh, &conf, &theta, 0.0).unwrap();
        let a = conormal_energy(&Level { t: 0.0, u: &u, theta, frame: &id }, None, &mesh, &params, &props, 0).unwrap();
        let b = conormal_energy(&Level { t: 0.0, u: &u, theta, frame: &rotated }, None, &mesh, &params, &props, 0).unwrap();
        assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn first_order_energy_needs_history() {
        let (mesh, params, props) = setup(8, 16);
        let u = FluidField::uniform(mesh.num_nodes(), 1.0, Vec3::zeros(), 0.0);
        let frame = Frame::identity(&mesh, 0.0);
        let level = Level { t: 0.0, u: &u, theta: SolidVelocity::zero(), frame: &frame };
        assert!(matches!(
            conormal_energy(&level, None, &mesh, &params, &props, 1),
            Err(Error::InsufficientHistory(_))
        ));
        let zero = FluidField::zeros(mesh.num_nodes());
        let e1 = conormal_energy(&level, Some(&History::Rate(&zero)), &mesh, &params, &props, 1).unwrap();
        let e0 = conormal_energy(&level, None, &mesh, &params, &props, 0).unwrap();
        assert_eq!(e0, e1);
    }

    #[test]
    fn residuals_vanish_at_rest() {
        let (mesh, params, _) = setup(16, 32);
        let u = FluidField::uniform(mesh.num_nodes(), 1.0, Vec3::zeros(), 0.3);
        let frame = Frame::identity(&mesh, 0.0);
        let prev = Level { t: 0.0, u: &u, theta: SolidVelocity::zero(), frame: &frame };
        let cur = Level { t: 0.01, ..prev };
        let reg = Regularization::none(&mesh, &u);
        let h = History::Previous(&prev);
        assert_eq!(vorticity_residual(&cur, &h, &mesh, &params, &reg).unwrap(), 0.0);
        assert_eq!(entropy_residual(&cur, &h, &mesh, &reg).unwrap(), 0.0);
    }

    #[test]
    fn exact_rate_closes_the_vorticity_balance() {
        // With ∂ₜU taken from the semi-discrete operator the balance only
        // carries stencil commutation errors, which shrink with the mesh.
        let mut errs = vec![];
        for (n_r, n_t) in [(32, 64), (64, 128)] {
            let (mesh, params, _) = setup(n_r, n_t);
            let mut u = FluidField::uniform(mesh.num_nodes(), 1.0, Vec3::zeros(), 0.0);
            for (n, x) in mesh.positions().iter().enumerate() {
                let bump = (-((x - Vec3::new(1.1, 0.2, 0.0)).norm_squared()) / 0.1).exp();
                u.u[n] = Vec3::new(-x.y, x.x, 0.0) * (0.05 * bump);
                u.p[n] = 1.0 + 0.02 * bump;
                u.s[n] = 0.05 * bump;
            }
            let frame = Frame::identity(&mesh, 0.0);
            let rate = spatial_residual(&u, &frame, &mesh, &params, &ResidualOptions::plain()).unwrap();
            let level = Level { t: 0.0, u: &u, theta: SolidVelocity::zero(), frame: &frame };
            let reg = Regularization::none(&mesh, &u);
            errs.push(vorticity_residual(&level, &History::Rate(&rate), &mesh, &params, &reg).unwrap());
            assert!(entropy_residual(&level, &History::Rate(&rate), &mesh, &reg).unwrap() < 1e-13);
        }
        assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
    }

    #[test]
    fn compatibility_residual_examples() {
        let (mesh, params, props) = setup(32, 64);
        let n = mesh.num_nodes();
        let rest = FluidField::uniform(n, 1.0, Vec3::zeros(), 0.0);
        let r = compatibility_residual(&rest, &SolidVelocity::zero(), &mesh, &params, &props, 2).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|v| *v == 0.0), "{r:?}");

        let mut leaking = rest.clone();
        for &k in &mesh.outer_patch().nodes {
            leaking.u[k] = mesh.radial_direction(k) * 0.01 * (1.0 + mesh.position(k).x);
        }
        let r = compatibility_residual(&leaking, &SolidVelocity::zero(), &mesh, &params, &props, 0).unwrap();
        let expect = mesh
            .outer_patch()
            .nodes
            .iter()
            .map(|&k| leaking.u[k].norm())
            .fold(0.0, f64::max);
        assert!((r[0] - expect).abs() < 1e-15);

        let mut radial = rest.clone();
        for (k, x) in mesh.positions().iter().enumerate() {
            radial.p[k] = 1.0 + 0.1 * x.norm_squared();
        }
        let r = compatibility_residual(&radial, &SolidVelocity::zero(), &mesh, &params, &props, 1).unwrap();
        let hand = [0.5f64, 2.0]
            .iter()
            .map(|rr| 0.2 * rr / (1.0 + 0.1 * rr * rr).powf(1.0 / 1.4))
            .fold(0.0, f64::max);
        assert!(r[0] == 0.0);
        assert!((r[1] - hand).abs() < 1e-10 * hand, "{} vs {hand}", r[1]);
    }
}
