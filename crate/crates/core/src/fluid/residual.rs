use rayon::prelude::*;

use crate::eos::ideal_coefficients;
use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::{Mat3, Vec3};

use super::coefficients::Frame;
use super::{FluidField, FluidParams, Limiter};

/// Switches for one evaluation of the spatial operator.
#[derive(Debug, Clone, Copy)]
pub struct ResidualOptions<'a> {
    pub eps: f64,
    /// Interior extension `ν` of the normal; only read when `eps > 0`.
    pub nu: &'a [Vec3],
    /// Source `F` of the regularized system.
    pub source: Option<&'a FluidField>,
    /// Add the limiter's dissipation.
    pub dissipation: bool,
}

impl<'a> ResidualOptions<'a> {
    /// Unregularized operator without dissipation.
    pub fn plain() -> Self {
        Self {
            eps: 0.0,
            nu: &[],
            source: None,
            dissipation: false,
        }
    }
}

/// Semi-discrete right side `R` in `∂ₜU = R`:
///
/// ```text
/// R_p = α F_p − v·∇p̄ − α div ū − α ε ν·∇p̄ − α t·ū
/// R_u = (ηM)⁻¹ (F_u − ∇p̄ − ε (ν·∇)ū) − (v·∇)ū − 𝒥₁⁻¹𝒥₂[ū, v] − K ū
/// R_s = F_s − v·∇s̄ − ε ν·∇s̄
/// ```
///
/// with `v = ū − ū_S`.
pub fn spatial_residual(
    u: &FluidField,
    frame: &Frame,
    mesh: &Mesh,
    params: &FluidParams,
    opts: &ResidualOptions,
) -> Result<FluidField> {
    let n_nodes = mesh.num_nodes();
    if u.len() != n_nodes {
        return Err(Error::Shape {
            expected: n_nodes,
            got: u.len(),
        });
    }
    let c4 = match (opts.dissipation, params.limiter) {
        (true, Limiter::Llf) => 1.0 / 12.0,
        _ => 0.0,
    };
    let eps = opts.eps;
    let axes = mesh.axes();
    let spacing = mesh.spacing();
    let bounds = params.bounds;

    let rows: Vec<Result<(f64, Vec3, f64)>> = (0..n_nodes)
        .into_par_iter()
        .map(|n| {
            let (p, uu, s) = (u.p[n], u.u[n], u.s[n]);
            if !bounds.contains(crate::eos::ThermoPair::new(p, s)) {
                return Err(Error::OutsideHyperbolicity {
                    p,
                    s,
                    bounds,
                    node: Some(n),
                });
            }
            let (alpha, eta, c) = ideal_coefficients(&params.eos, p, s);
            let inv = mesh.inverse_chart(n);
            let mut gp = Vec3::zeros();
            let mut gs = Vec3::zeros();
            let mut gu = Mat3::zeros();
            for a in 0..axes {
                let row = inv.row(a).transpose();
                gp += row * mesh.logical_derivative(&u.p, n, a);
                gs += row * mesh.logical_derivative(&u.s, n, a);
                gu += mesh.logical_derivative(&u.u, n, a) * row.transpose();
            }
            let f = &frame.nodes[n];
            let v = uu - f.us;
            let (fp, fu, fs) = match opts.source {
                Some(src) => (src.p[n], src.u[n], src.s[n]),
                None => (0.0, Vec3::zeros(), 0.0),
            };
            let mut rp = alpha * fp - v.dot(&gp) - alpha * gu.trace();
            let mut force = fu - gp;
            let mut rs = fs - v.dot(&gs);
            if eps != 0.0 {
                let nu = opts.nu[n];
                rp -= alpha * eps * nu.dot(&gp);
                force -= gu * nu * eps;
                rs -= eps * nu.dot(&gs);
            }
            let mut ru;
            if frame.trivial {
                ru = force / eta - gu * v;
            } else {
                rp -= alpha * f.tvec.dot(&uu);
                ru = f.metric_inv * force / eta - gu * v - f.c_apply(&uu, &v) - f.k * uu;
            }
            if c4 != 0.0 {
                let speed = (v.norm() + c + eps * alpha.max(1.0 / eta).max(1.0)).max(1e-12);
                for a in 0..axes {
                    let Some(dp) = mesh.fourth_difference(&u.p, n, a) else {
                        continue;
                    };
                    let du = mesh.fourth_difference(&u.u, n, a).unwrap();
                    let ds = mesh.fourth_difference(&u.s, n, a).unwrap();
                    let k = c4 * speed * mesh.logical_gradient_norm(n, a) / spacing[a];
                    rp -= k * dp;
                    ru -= du * k;
                    rs -= k * ds;
                }
            }
            Ok((rp, ru, rs))
        })
        .collect();

    let mut out = FluidField {
        p: Vec::with_capacity(n_nodes),
        u: Vec::with_capacity(n_nodes),
        s: Vec::with_capacity(n_nodes),
    };
    for r in rows {
        let (rp, ru, rs) = r?;
        out.p.push(rp);
        out.u.push(ru);
        out.s.push(rs);
    }
    if mesh.dim() == 2 {
        for v in out.u.iter_mut() {
            v.z = 0.0;
        }
    }
    Ok(out)
}
