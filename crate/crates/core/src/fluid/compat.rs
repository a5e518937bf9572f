use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::kinematics::{skew, Configuration, RigidMotion, SolidVelocity};
use crate::solid::{solid_rate, surface_load, BodyProps};
use crate::{Mat3, Vec3};

use super::coefficients::Frame;
use super::residual::{spatial_residual, ResidualOptions};
use super::{FluidField, FluidParams};

/// `∂ₜᵏ(U, Θ)` at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatMoment {
    pub u: FluidField,
    pub theta: SolidVelocity,
}

/// Step of the central difference used for the second time derivative.
const TAU: f64 = 1e-4;

fn solid_trace(u: &FluidField, mesh: &Mesh) -> Vec<f64> {
    mesh.solid_patch().nodes.iter().map(|&n| u.p[n]).collect()
}

/// Configuration `Υ(τ)` to first order in `τ` about the initial data.
fn linearized_configuration(mesh: &Mesh, theta0: &SolidVelocity, tau: f64) -> Configuration {
    let motion = RigidMotion {
        h: Vec3::zeros(),
        l: theta0.l_bar,
        omega: theta0.omega_bar,
    };
    let cutoff = mesh.spec().cutoff();
    let mut conf = Configuration::initial(mesh);
    conf.h = theta0.l_bar * tau;
    conf.q = Mat3::identity() + skew(&theta0.omega_bar) * tau;
    for n in 0..mesh.num_nodes() {
        let jet = motion.jet(&cutoff, &mesh.position(n));
        conf.phi[n] += jet.v * tau;
        conf.j1[n] += jet.grad * tau;
        for i in 0..3 {
            conf.j2[n][i] = jet.hess[i] * tau;
        }
    }
    conf
}

/// Time derivatives `𝓘⁰..𝓘ᴷ` of the coupled solution at `t = 0`, obtained
/// from the right sides of the unregularized system with the solver's
/// stencils (no dissipation) and the patch quadrature for the loads.
pub fn compatibility_derivatives(
    u0: &FluidField,
    theta0: &SolidVelocity,
    mesh: &Mesh,
    params: &FluidParams,
    props: &BodyProps,
    order: usize,
) -> Result<Vec<CompatMoment>> {
    if order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    u0.check_box(&params.bounds)?;
    let mut out = vec![CompatMoment {
        u: u0.clone(),
        theta: *theta0,
    }];
    if order == 0 {
        return Ok(out);
    }
    let plain = ResidualOptions::plain();
    let frame0 = Frame::new(mesh, &Configuration::initial(mesh), theta0, 0.0)?;
    let i1_u = spatial_residual(u0, &frame0, mesh, params, &plain)?;
    let load0 = surface_load(&solid_trace(u0, mesh), mesh)?;
    let i1_theta = solid_rate(theta0, &load0, props);
    out.push(CompatMoment {
        u: i1_u.clone(),
        theta: i1_theta,
    });
    if order == 1 {
        return Ok(out);
    }

    let eval = |sign: f64| -> Result<FluidField> {
        let tau = sign * TAU;
        let conf = linearized_configuration(mesh, theta0, tau);
        let theta = *theta0 + i1_theta * tau;
        let frame = Frame::new(mesh, &conf, &theta, tau)?;
        spatial_residual(&u0.lincomb(1.0, &i1_u, tau), &frame, mesh, params, &plain)
    };
    let i2_u = eval(1.0)?.lincomb(0.5 / TAU, &eval(-1.0)?, -0.5 / TAU);

    let dload = surface_load(&solid_trace(&i1_u, mesh), mesh)?;
    let (l0, w0) = (theta0.l_bar, theta0.omega_bar);
    let (l1, w1) = (i1_theta.l_bar, i1_theta.omega_bar);
    let l2 = l1.cross(&w0) + l0.cross(&w1) + dload.force / props.body_mass;
    let gyro = props.j0.apply(&w1).cross(&w0) + props.j0.apply(&w0).cross(&w1);
    let w2 = props.j0.solve(&(gyro + dload.torque));
    out.push(CompatMoment {
        u: i2_u,
        theta: SolidVelocity::new(l2, w2),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec, Resolution};
    use crate::solid::mass_properties;

    fn setup() -> (Mesh, BodyProps) {
        let spec = DomainSpec::default();
        let mesh = build_mesh(&spec, Resolution::planar(32, 64)).unwrap();
        let props = mass_properties(1.0, &spec).unwrap();
        (mesh, props)
    }

    #[test]
    fn uniform_rest_has_zero_derivatives() {
        let (mesh, props) = setup();
        let u0 = FluidField::uniform(mesh.num_nodes(), 1.0, Vec3::zeros(), 0.1);
        let m = compatibility_derivatives(&u0, &SolidVelocity::zero(), &mesh, &FluidParams::default(), &props, 2).unwrap();
        assert_eq!(m.len(), 3);
        for k in 1..3 {
            assert!(m[k].u.max_abs_diff(&FluidField::zeros(mesh.num_nodes())) < 1e-12);
            assert!(m[k].theta.max_abs() < 1e-12);
        }
    }

    #[test]
    fn radial_pressure_gives_minus_gradient_over_density() {
        let (mesh, props) = setup();
        let mut u0 = FluidField::uniform(mesh.num_nodes(), 1.0, Vec3::zeros(), 0.0);
        for (n, x) in mesh.positions().iter().enumerate() {
            u0.p[n] = 1.0 + 0.1 * x.norm_squared();
        }
        let params = FluidParams::default();
        let m = compatibility_derivatives(&u0, &SolidVelocity::zero(), &mesh, &params, &props, 1).unwrap();
        for (n, x) in mesh.positions().iter().enumerate() {
            let rho = (u0.p[n]).powf(1.0 / 1.4);
            let expect = -x * 0.2 / rho;
            assert!((m[1].u.u[n] - expect).norm() < 1e-10, "{n}");
            assert!(m[1].u.p[n].abs() < 1e-12);
            assert!(m[1].u.s[n].abs() < 1e-12);
        }
        assert!(m[1].theta.max_abs() < 1e-12);
    }

    #[test]
    fn third_order_is_rejected() {
        let (mesh, props) = setup();
        let u0 = FluidField::uniform(mesh.num_nodes(), 1.0, Vec3::zeros(), 0.0);
        assert_eq!(
            compatibility_derivatives(&u0, &SolidVelocity::zero(), &mesh, &FluidParams::default(), &props, 3),
            Err(Error::UnsupportedOrder(3))
        );
    }
}
