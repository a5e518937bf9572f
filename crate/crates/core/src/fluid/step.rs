use crate::eos::ideal_coefficients;
use crate::error::{Error, Result};
use crate::geometry::Mesh;

use super::boundary::apply_boundary;
use super::coefficients::Frame;
use super::regularization::Regularization;
use super::residual::{spatial_residual, ResidualOptions};
use super::{FluidField, FluidParams};

/// Coefficient frames at `t`, `t + dt/2` and `t + dt`; the step starts at
/// `start.t`.
#[derive(Debug, Clone, Copy)]
pub struct StageFrames<'a> {
    pub start: &'a Frame,
    pub mid: &'a Frame,
    pub end: &'a Frame,
}

impl<'a> StageFrames<'a> {
    /// The same frame at all three stage times (frozen solid).
    pub fn frozen(frame: &'a Frame) -> Self {
        Self {
            start: frame,
            mid: frame,
            end: frame,
        }
    }
}

/// Largest admissible step: `cfl / max_n Σ_a λ_a/Δξ_a` with the logical
/// speeds `λ_a = (|ū − ū_S| + c + ε·max(α, 1/η, 1))·|∇ξ^a|`.
pub fn stable_dt(u: &FluidField, frame: &Frame, mesh: &Mesh, params: &FluidParams, eps: f64) -> Result<f64> {
    let spacing = mesh.spacing();
    let mut rate: f64 = 0.0;
    for n in 0..mesh.num_nodes() {
        let (p, s) = (u.p[n], u.s[n]);
        if !(p > 0.0) {
            return Err(Error::NonPositivePressure { p });
        }
        let (alpha, eta, c) = ideal_coefficients(&params.eos, p, s);
        let v = u.u[n] - frame.nodes[n].us;
        let speed = (v.norm() + c + eps * alpha.max(1.0 / eta).max(1.0)).max(1e-12);
        let r: f64 = (0..mesh.axes())
            .map(|a| speed * mesh.logical_gradient_norm(n, a) / spacing[a])
            .sum();
        rate = rate.max(r);
    }
    Ok(params.cfl / rate)
}

/// One SSP-RK3 step of the fluid with the wall closure applied after every
/// stage; the state is verified to stay in the hyperbolicity box.
pub fn fluid_step(
    u: &FluidField,
    frames: &StageFrames<'_>,
    reg: &Regularization,
    mesh: &Mesh,
    params: &FluidParams,
    dt: f64,
) -> Result<FluidField> {
    let limit = stable_dt(u, frames.start, mesh, params, reg.eps)?;
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepSize { dt, limit });
    }
    let t = frames.start.t;
    let eval = |state: &FluidField, frame: &Frame, time: f64| -> Result<FluidField> {
        let source = reg.source(time);
        let opts = ResidualOptions {
            eps: reg.eps,
            nu: &reg.nu.nu,
            source: source.as_ref(),
            dissipation: true,
        };
        spatial_residual(state, frame, mesh, params, &opts)
    };

    let r0 = eval(u, frames.start, t)?;
    let mut u1 = u.clone();
    u1.axpy(dt, &r0);
    apply_boundary(&mut u1, &frames.end.theta, reg.eps, mesh, params);

    let r1 = eval(&u1, frames.end, t + dt)?;
    let mut u2 = u.clone();
    u2.axpy(0.25 * dt, &r0);
    u2.axpy(0.25 * dt, &r1);
    apply_boundary(&mut u2, &frames.mid.theta, reg.eps, mesh, params);

    let r2 = eval(&u2, frames.mid, t + 0.5 * dt)?;
    let mut out = u.clone();
    let inc = r0.lincomb(1.0, &r1, 1.0).lincomb(1.0, &r2, 4.0);
    out.axpy(dt / 6.0, &inc);
    apply_boundary(&mut out, &frames.end.theta, reg.eps, mesh, params);
    out.check_box(&params.bounds)?;
    Ok(out)
}
