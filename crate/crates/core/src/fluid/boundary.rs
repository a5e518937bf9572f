use crate::eos::ideal_coefficients;
use crate::geometry::{Mesh, PatchTag};
use crate::kinematics::SolidVelocity;

use super::{FluidField, FluidParams};

/// Prescribed normal velocity `ū_S·n₀` on each face of a patch.
pub fn boundary_data(theta: &SolidVelocity, mesh: &Mesh, tag: PatchTag) -> Vec<f64> {
    let patch = mesh.patch(tag);
    match tag {
        PatchTag::Solid => patch
            .positions
            .iter()
            .zip(&patch.normals)
            .map(|(x, n)| theta.rigid_velocity(x).dot(n))
            .collect(),
        PatchTag::Outer => vec![0.0; patch.len()],
    }
}

/// Close the boundary nodes: impose `ū·n₀ = ū_S·n₀` while keeping the
/// outgoing acoustic characteristic, the tangential velocity and `s̄` of
/// the interior update.
///
/// The metric is the identity near both walls, so the `(p̄, ū·n₀)` block of
/// `(A⁰)⁻¹ Σ 𝒜ʲn₀ⱼ` is `[[v_n + αε, α], [1/η, v_n + ε/η]]`; its left
/// eigenvector for the positive eigenvalue fixes the pressure correction.
pub fn apply_boundary(
    u: &mut FluidField,
    theta: &SolidVelocity,
    eps: f64,
    mesh: &Mesh,
    params: &FluidParams,
) {
    for tag in [PatchTag::Solid, PatchTag::Outer] {
        let patch = mesh.patch(tag);
        let g = boundary_data(theta, mesh, tag);
        for (f, &n) in patch.nodes.iter().enumerate() {
            let n0 = patch.normals[f];
            let (p, s) = (u.p[n], u.s[n]);
            if !(p > 0.0) {
                continue;
            }
            let (alpha, eta, _) = ideal_coefficients(&params.eos, p, s);
            let un = u.u[n].dot(&n0);
            let vn = un - g[f];
            let a11 = vn + alpha * eps;
            let a22 = vn + eps / eta;
            let half_tr = 0.5 * (a11 + a22);
            let disc = (0.25 * (a11 - a22).powi(2) + alpha / eta).sqrt();
            let lambda = half_tr + disc;
            let ratio = (lambda - a11) * eta;
            u.p[n] = p + ratio * (un - g[f]);
            u.u[n] += n0 * (g[f] - un);
        }
    }
}

/// `max |ū·n₀ − ū_S·n₀|` over all boundary faces.
pub fn boundary_mismatch(u: &FluidField, theta: &SolidVelocity, mesh: &Mesh) -> f64 {
    let mut worst: f64 = 0.0;
    for tag in [PatchTag::Solid, PatchTag::Outer] {
        let patch = mesh.patch(tag);
        let g = boundary_data(theta, mesh, tag);
        for (f, &n) in patch.nodes.iter().enumerate() {
            worst = worst.max((u.u[n].dot(&patch.normals[f]) - g[f]).abs());
        }
    }
    worst
}
