use crate::error::{Error, Result};
use crate::geometry::{Mesh, NormalExtension};
use crate::Vec3;

use super::FluidField;

/// `ε`-shift data: the normal extension, the time moments `𝓘ᵏ_U` of the
/// reference extension and the matching source moments `ε(ν·∇)𝓘ᵏ_U`.
#[derive(Debug, Clone)]
pub struct Regularization {
    pub eps: f64,
    pub nu: NormalExtension,
    pub moments: Vec<FluidField>,
    source_moments: Vec<FluidField>,
}

/// `(ν·∇)U` with the solver's difference stencils.
pub fn directional_derivative(u: &FluidField, nu: &[Vec3], mesh: &Mesh) -> FluidField {
    let n = mesh.num_nodes();
    let mut out = FluidField::zeros(n);
    for k in 0..n {
        if nu[k] == Vec3::zeros() {
            continue;
        }
        out.p[k] = mesh.gradient(&u.p, k).dot(&nu[k]);
        out.u[k] = mesh.vector_gradient(&u.u, k) * nu[k];
        out.s[k] = mesh.gradient(&u.s, k).dot(&nu[k]);
    }
    out
}

impl Regularization {
    /// `moments[0]` must be the initial data; `moments.len() - 1` is the
    /// source degree `K ≤ 2`.
    pub fn new(eps: f64, mesh: &Mesh, moments: Vec<FluidField>) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidParameter(format!(
                "fluid.eps must lie in [0, 1] (got {eps})"
            )));
        }
        if moments.is_empty() {
            return Err(Error::InvalidParameter(
                "at least the zeroth moment (initial data) is required".into(),
            ));
        }
        if moments.len() > 3 {
            return Err(Error::UnsupportedOrder(moments.len() - 1));
        }
        let nu = mesh.extended_normal();
        let source_moments = if eps > 0.0 {
            moments
                .iter()
                .map(|m| directional_derivative(m, &nu.nu, mesh).scaled(eps))
                .collect()
        } else {
            vec![]
        };
        Ok(Self {
            eps,
            nu,
            moments,
            source_moments,
        })
    }

    /// No shift and no source.
    pub fn none(mesh: &Mesh, u0: &FluidField) -> Self {
        Self {
            eps: 0.0,
            nu: mesh.extended_normal(),
            moments: vec![u0.clone()],
            source_moments: vec![],
        }
    }

    pub fn degree(&self) -> usize {
        self.moments.len() - 1
    }

    fn taylor(fields: &[FluidField], t: f64) -> FluidField {
        let mut out = fields[0].clone();
        let mut coef = 1.0;
        for (k, f) in fields.iter().enumerate().skip(1) {
            coef *= t / k as f64;
            out.axpy(coef, f);
        }
        out
    }

    /// `(Ũ(t), F(t))` with `Ũ = Σ 𝓘ᵏ tᵏ/k!` and `F = ε(ν·∇)Ũ`.
    pub fn reference_extension(&self, t: f64) -> (FluidField, FluidField) {
        let u = Self::taylor(&self.moments, t);
        let f = match self.source(t) {
            Some(f) => f,
            None => FluidField::zeros(u.len()),
        };
        (u, f)
    }

    /// `F(t)`, or `None` when `ε = 0`.
    pub fn source(&self, t: f64) -> Option<FluidField> {
        if self.eps == 0.0 {
            None
        } else {
            Some(Self::taylor(&self.source_moments, t))
        }
    }
}
