//! Fluid block on the fixed reference domain.
//!
//! Unknowns are `U = (p̄, ū, s̄)` at mesh nodes. The semi-discrete operator
//! uses second-order central differences on the chart, a speed-scaled
//! fourth-difference dissipation (`llf` limiter), a characteristic wall
//! closure and SSP-RK3 in time.

mod boundary;
mod coefficients;
mod compat;
mod regularization;
mod residual;
mod step;

pub use boundary::{apply_boundary, boundary_data, boundary_mismatch};
pub use coefficients::{assemble_coefficients, CoefficientSet, Frame, NodeFrame};
pub use compat::{compatibility_derivatives, CompatMoment};
pub use regularization::{directional_derivative, Regularization};
pub use residual::{spatial_residual, ResidualOptions};
pub use step::{fluid_step, stable_dt, StageFrames};

use serde::{Deserialize, Serialize};

use crate::eos::{EosParams, HyperbolicityBox, ThermoPair};
use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::Vec3;

/// Nodal fluid state `(p̄, ū, s̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidField {
    pub p: Vec<f64>,
    pub u: Vec<Vec3>,
    pub s: Vec<f64>,
}

impl FluidField {
    pub fn uniform(n: usize, p: f64, u: Vec3, s: f64) -> Self {
        Self {
            p: vec![p; n],
            u: vec![u; n],
            s: vec![s; n],
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::uniform(n, 0.0, Vec3::zeros(), 0.0)
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// `a·self + b·other`.
    pub fn lincomb(&self, a: f64, other: &FluidField, b: f64) -> FluidField {
        FluidField {
            p: self.p.iter().zip(&other.p).map(|(x, y)| a * x + b * y).collect(),
            u: self.u.iter().zip(&other.u).map(|(x, y)| x * a + y * b).collect(),
            s: self.s.iter().zip(&other.s).map(|(x, y)| a * x + b * y).collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> FluidField {
        FluidField {
            p: self.p.iter().map(|x| a * x).collect(),
            u: self.u.iter().map(|x| x * a).collect(),
            s: self.s.iter().map(|x| a * x).collect(),
        }
    }

    /// `self += b·other`.
    pub fn axpy(&mut self, b: f64, other: &FluidField) {
        for (x, y) in self.p.iter_mut().zip(&other.p) {
            *x += b * y;
        }
        for (x, y) in self.u.iter_mut().zip(&other.u) {
            *x += y * b;
        }
        for (x, y) in self.s.iter_mut().zip(&other.s) {
            *x += b * y;
        }
    }

    /// Largest absolute difference over all components.
    pub fn max_abs_diff(&self, other: &FluidField) -> f64 {
        let p = self.p.iter().zip(&other.p).map(|(a, b)| (a - b).abs());
        let u = self
            .u
            .iter()
            .zip(&other.u)
            .map(|(a, b)| (a - b).amax());
        let s = self.s.iter().zip(&other.s).map(|(a, b)| (a - b).abs());
        p.chain(u).chain(s).fold(0.0, f64::max)
    }

    /// Weighted L² distance over all components.
    pub fn l2_distance(&self, other: &FluidField, mesh: &Mesh) -> f64 {
        let w = mesh.node_weights();
        (0..self.len())
            .map(|n| {
                w[n] * ((self.p[n] - other.p[n]).powi(2)
                    + (self.u[n] - other.u[n]).norm_squared()
                    + (self.s[n] - other.s[n]).powi(2))
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Weighted L² norm over all components.
    pub fn l2_norm(&self, mesh: &Mesh) -> f64 {
        self.l2_distance(&FluidField::zeros(self.len()), mesh)
    }

    /// Verify every node lies in the hyperbolicity box.
    pub fn check_box(&self, bounds: &HyperbolicityBox) -> Result<()> {
        for (n, (p, s)) in self.p.iter().zip(&self.s).enumerate() {
            bounds
                .check(ThermoPair::new(*p, *s))
                .map_err(|e| e.at_node(n))?;
        }
        Ok(())
    }

    /// Node-major interleaving `p, u_x, u_y, [u_z,] s` for snapshots.
    pub fn interleaved(&self, dim: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * (dim + 2));
        for n in 0..self.len() {
            out.push(self.p[n]);
            for d in 0..dim {
                out.push(self.u[n][d]);
            }
            out.push(self.s[n]);
        }
        out
    }
}

/// Dissipation applied on top of the central operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Limiter {
    None,
    #[default]
    Llf,
}

/// Fixed numerical and material parameters of the fluid solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    pub eos: EosParams,
    pub bounds: HyperbolicityBox,
    pub cfl: f64,
    pub limiter: Limiter,
}

impl Default for FluidParams {
    fn default() -> Self {
        Self {
            eos: EosParams::default(),
            bounds: HyperbolicityBox::default(),
            cfl: 0.4,
            limiter: Limiter::Llf,
        }
    }
}

impl FluidParams {
    pub fn validate(&self) -> Result<()> {
        self.eos.validate()?;
        self.bounds.validate()?;
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fluid.cfl must lie in (0, 1] (got {})",
                self.cfl
            )));
        }
        Ok(())
    }
}
