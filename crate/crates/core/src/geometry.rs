//! Reference domain and boundary-fitted structured mesh.
//!
//! The fluid domain `F(0)` is the region between a solid disk (sphere) of
//! radius `r_s` centred at the origin and an outer circle (sphere) of radius
//! `R_o` centred at `-offset`. It is covered by the single chart
//!
//! ```text
//! x(ξ, θ[, ψ]) = ξ·o + r(ξ)·e(θ[, ψ]),   r(ξ) = r_s + (R_o - r_s)·ξ,   o = -offset
//! ```
//!
//! with `ξ ∈ [0, 1]` the wall-normal coordinate (`ξ = 0` on the solid,
//! `ξ = 1` on the outer wall). In 2D `θ` is periodic; in 3D `θ` is the polar
//! angle sampled at cell centres (no node on the poles) and `ψ` the periodic
//! azimuth. Fields live on nodes; logical derivatives are second-order
//! finite differences and are mapped to Cartesian ones with the analytic
//! inverse chart Jacobian.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Mat3, Vec3};

/// Geometry of the reference configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub dim: usize,
    pub r_s: f64,
    pub r_o: f64,
    /// Inner margin of the cutoff: `χ = 1` within `R0` of the solid, `0` beyond `2·R0`.
    pub r0: f64,
    /// Displacement of the solid centre from the outer centre.
    pub offset: Vec3,
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self {
            dim: 2,
            r_s: 0.5,
            r_o: 2.0,
            r0: 0.3,
            offset: Vec3::zeros(),
        }
    }
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::Validation(format!(
                "geometry.dim must be 2 or 3 (got {})",
                self.dim
            )));
        }
        if !(self.r_s > 0.0) {
            return Err(Error::Validation(format!(
                "geometry.r_s must be > 0 (got {})",
                self.r_s
            )));
        }
        if !(self.r0 > 0.0) {
            return Err(Error::Validation(format!(
                "geometry.R0 must be > 0 (got {})",
                self.r0
            )));
        }
        if self.dim == 2 && self.offset.z != 0.0 {
            return Err(Error::Validation(
                "geometry.offset must be planar when dim = 2".into(),
            ));
        }
        let reach = self.r_s + self.offset.norm() + 2.0 * self.r0;
        if !(reach < self.r_o) {
            return Err(Error::Validation(format!(
                "DomainSpec invariant r_s + |offset| + 2·R0 < R_o violated ({reach} >= {})",
                self.r_o
            )));
        }
        Ok(())
    }

    /// Centre of the outer boundary in reference coordinates.
    pub fn outer_center(&self) -> Vec3 {
        -self.offset
    }

    /// Distance from `y` to the reference solid `S(0)` (zero inside it).
    pub fn distance_to_solid(&self, y: &Vec3) -> f64 {
        (y.norm() - self.r_s).max(0.0)
    }

    pub fn cutoff(&self) -> Cutoff {
        Cutoff {
            r_s: self.r_s,
            r0: self.r0,
            dim: self.dim,
        }
    }
}

/// Node counts of the logical grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    /// Radial cells; there are `n_r + 1` radial node layers.
    pub n_r: usize,
    /// Angular cells (periodic in 2D, polar in 3D).
    pub n_theta: usize,
    /// Azimuthal cells, 3D only.
    pub n_phi: usize,
}

impl Resolution {
    pub fn planar(n_r: usize, n_theta: usize) -> Self {
        Self {
            n_r,
            n_theta,
            n_phi: 1,
        }
    }

    pub fn spatial(n_r: usize, n_theta: usize, n_phi: usize) -> Self {
        Self {
            n_r,
            n_theta,
            n_phi,
        }
    }

    /// Scale every direction by `factor`.
    pub fn refined(&self, factor: usize, dim: usize) -> Self {
        Self {
            n_r: self.n_r * factor,
            n_theta: self.n_theta * factor,
            n_phi: if dim == 3 { self.n_phi * factor } else { 1 },
        }
    }
}

/// Quintic smoothstep `6t⁵ − 15t⁴ + 10t³`, clamped to `[0, 1]`.
#[inline]
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    }
}

/// C^∞ transition `1 / (1 + exp(1/t − 1/(1 − t)))` from 0 at `t ≤ 0` to 1
/// at `t ≥ 1`, with its first two derivatives.
#[inline]
pub fn smooth_transition(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let s = 1.0 - t;
    let g = 1.0 / (1.0 + (1.0 / t - 1.0 / s).exp());
    let q = 1.0 / (t * t) + 1.0 / (s * s);
    let dq = 2.0 / (s * s * s) - 2.0 / (t * t * t);
    let d1 = g * (1.0 - g) * q;
    let d2 = d1 * (1.0 - 2.0 * g) * q + g * (1.0 - g) * dq;
    (g, d1, d2)
}

/// Cutoff `χ` around the reference solid, as a function of the distance to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    r_s: f64,
    r0: f64,
    dim: usize,
}

/// Value, gradient and Hessian of the cutoff at a point.
#[derive(Debug, Clone, Copy)]
pub struct CutoffJet {
    pub value: f64,
    pub grad: Vec3,
    pub hess: Mat3,
}

impl Cutoff {
    pub fn value(&self, y: &Vec3) -> f64 {
        let d = y.norm() - self.r_s;
        1.0 - smooth_transition((d - self.r0) / self.r0).0
    }

    /// `χ` with its first two derivatives. Both derivatives vanish outside
    /// the transition band `R0 < dist < 2·R0`.
    pub fn jet(&self, y: &Vec3) -> CutoffJet {
        let r = y.norm();
        let tau = (r - self.r_s - self.r0) / self.r0;
        if tau <= 0.0 || tau >= 1.0 {
            return CutoffJet {
                value: if tau <= 0.0 { 1.0 } else { 0.0 },
                grad: Vec3::zeros(),
                hess: Mat3::zeros(),
            };
        }
        let (g, g1, g2) = smooth_transition(tau);
        let d1 = -g1 / self.r0;
        let d2 = -g2 / (self.r0 * self.r0);
        let e = y / r;
        let mut proj = Mat3::identity();
        if self.dim == 2 {
            proj[(2, 2)] = 0.0;
        }
        let eet = e * e.transpose();
        CutoffJet {
            value: 1.0 - g,
            grad: e * d1,
            hess: eet * d2 + (proj - eet) * (d1 / r),
        }
    }
}

/// `χ(y)` for the given domain.
pub fn cutoff(spec: &DomainSpec, y: &Vec3) -> f64 {
    spec.cutoff().value(y)
}

/// Which wall a boundary patch lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatchTag {
    Solid,
    Outer,
}

impl PatchTag {
    pub fn name(self) -> &'static str {
        match self {
            PatchTag::Solid => "SOLID",
            PatchTag::Outer => "OUTER",
        }
    }
}

/// One face per boundary node. Normals point out of the fluid: into the
/// solid on `Solid`, away from `Ω` on `Outer`.
#[derive(Debug, Clone)]
pub struct BoundaryPatch {
    pub tag: PatchTag,
    pub nodes: Vec<usize>,
    pub normals: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub positions: Vec<Vec3>,
}

impl BoundaryPatch {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Things that can be integrated over a patch.
pub trait Integrand: Copy {
    fn zero() -> Self;
    fn add_scaled(self, other: Self, w: f64) -> Self;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add_scaled(self, other: Self, w: f64) -> Self {
        self + w * other
    }
}

impl Integrand for Vec3 {
    fn zero() -> Self {
        Vec3::zeros()
    }
    fn add_scaled(self, other: Self, w: f64) -> Self {
        self + other * w
    }
}

/// `Σ_f w_f · integrand_f`, summed in face order.
pub fn surface_integral<T: Integrand>(patch: &BoundaryPatch, integrand: &[T]) -> Result<T> {
    if integrand.len() != patch.len() {
        return Err(Error::Shape {
            expected: patch.len(),
            got: integrand.len(),
        });
    }
    Ok(integrand
        .iter()
        .zip(&patch.weights)
        .fold(T::zero(), |acc, (v, w)| acc.add_scaled(*v, *w)))
}

/// Smooth interior extension `ν` of the boundary normal.
#[derive(Debug, Clone)]
pub struct NormalExtension {
    pub nu: Vec<Vec3>,
}

/// Logical position of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeIndex {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

/// Structured boundary-fitted mesh of the annulus (2D) or spherical shell (3D).
#[derive(Debug, Clone)]
pub struct Mesh {
    spec: DomainSpec,
    res: Resolution,
    nr1: usize,
    spacing: [f64; 3],
    positions: Vec<Vec3>,
    /// Row `a` is `∇ξ^a` at the node.
    dxi_dx: Vec<Mat3>,
    radial_length: Vec<f64>,
    radial_dir: Vec<Vec3>,
    weights: Vec<f64>,
    cell_volumes: Vec<f64>,
    /// Neighbours at offsets -2, -1, +1, +2 along the angular axes.
    angular_nbr: [Vec<[usize; 4]>; 2],
    solid: BoundaryPatch,
    outer: BoundaryPatch,
}

/// Build the mesh of `F(0)` at the requested resolution.
pub fn build_mesh(spec: &DomainSpec, res: Resolution) -> Result<Mesh> {
    Mesh::new(spec, res)
}

impl Mesh {
    pub fn new(spec: &DomainSpec, res: Resolution) -> Result<Self> {
        spec.validate()
            .map_err(|e| Error::Construction(e.to_string()))?;
        if res.n_r < 8 || res.n_theta < 8 {
            return Err(Error::Construction(format!(
                "resolution must be at least 8 cells per direction (got {}x{})",
                res.n_r, res.n_theta
            )));
        }
        let res = if spec.dim == 2 {
            Resolution { n_phi: 1, ..res }
        } else {
            if res.n_phi < 8 || res.n_phi % 2 != 0 {
                return Err(Error::Construction(format!(
                    "3D meshes need an even azimuthal count >= 8 (got {})",
                    res.n_phi
                )));
            }
            res
        };
        let nr1 = res.n_r + 1;
        let dxi = 1.0 / res.n_r as f64;
        let (dth, dps) = if spec.dim == 2 {
            (2.0 * PI / res.n_theta as f64, 1.0)
        } else {
            (PI / res.n_theta as f64, 2.0 * PI / res.n_phi as f64)
        };
        let spacing = [dxi, dth, dps];
        let n = nr1 * res.n_theta * res.n_phi;
        let o = spec.outer_center();
        let dr = spec.r_o - spec.r_s;
        let radius = |xi: f64| spec.r_s + dr * xi;

        let mut positions = Vec::with_capacity(n);
        let mut dxi_dx = Vec::with_capacity(n);
        let mut radial_length = Vec::with_capacity(n);
        let mut radial_dir = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for k in 0..res.n_phi {
            for j in 0..res.n_theta {
                for i in 0..nr1 {
                    let xi = i as f64 * dxi;
                    let r = radius(xi);
                    let xi_lo = (xi - 0.5 * dxi).max(0.0);
                    let xi_hi = (xi + 0.5 * dxi).min(1.0);
                    let (r_lo, r_hi) = (radius(xi_lo), radius(xi_hi));
                    let (e, jac, w) = if spec.dim == 2 {
                        let th = j as f64 * dth;
                        let e = Vec3::new(th.cos(), th.sin(), 0.0);
                        let et = Vec3::new(-th.sin(), th.cos(), 0.0);
                        let jac = Mat3::from_columns(&[o + e * dr, et * r, Vec3::z()]);
                        let (a, b) = (th - 0.5 * dth, th + 0.5 * dth);
                        let int_e = Vec3::new(b.sin() - a.sin(), a.cos() - b.cos(), 0.0);
                        let int_r = 0.5 * (r_lo + r_hi) * (xi_hi - xi_lo);
                        let w = 0.5 * (r_hi * r_hi - r_lo * r_lo) * dth + int_r * o.dot(&int_e);
                        (e, jac, w)
                    } else {
                        let th = (j as f64 + 0.5) * dth;
                        let ps = k as f64 * dps;
                        let (st, ct, sp, cp) = (th.sin(), th.cos(), ps.sin(), ps.cos());
                        let e = Vec3::new(st * cp, st * sp, ct);
                        let et = Vec3::new(ct * cp, ct * sp, -st);
                        let ep = Vec3::new(-sp, cp, 0.0);
                        let jac = Mat3::from_columns(&[o + e * dr, et * r, ep * (r * st)]);
                        let (a, b) = (th - 0.5 * dth, th + 0.5 * dth);
                        let (c, d) = (ps - 0.5 * dps, ps + 0.5 * dps);
                        let sin2 = |t: f64| 0.5 * t - 0.25 * (2.0 * t).sin();
                        let int_sin2 = sin2(b) - sin2(a);
                        let int_e = Vec3::new(
                            int_sin2 * (d.sin() - c.sin()),
                            int_sin2 * (c.cos() - d.cos()),
                            0.5 * (b.sin().powi(2) - a.sin().powi(2)) * dps,
                        );
                        let int_r2 = (r_hi.powi(3) - r_lo.powi(3)) / (3.0 * dr);
                        let w = (r_hi.powi(3) - r_lo.powi(3)) / 3.0 * dps * (a.cos() - b.cos())
                            + int_r2 * o.dot(&int_e);
                        (e, jac, w)
                    };
                    let det = jac.determinant();
                    if !(det > 0.0) {
                        return Err(Error::Construction(format!(
                            "non-positive chart Jacobian {det} at node ({i}, {j}, {k})"
                        )));
                    }
                    positions.push(o * xi + e * r);
                    dxi_dx.push(jac.try_inverse().ok_or_else(|| {
                        Error::Construction(format!("singular chart at node ({i}, {j}, {k})"))
                    })?);
                    radial_length.push((o + e * dr).norm());
                    radial_dir.push(e);
                    weights.push(w);
                }
            }
        }

        let cell_volumes = cell_volumes(spec, &res, spacing);
        let angular_nbr = angular_neighbours(spec.dim, nr1, &res);

        let mut mesh = Self {
            spec: *spec,
            res,
            nr1,
            spacing,
            positions,
            dxi_dx,
            radial_length,
            radial_dir,
            weights,
            cell_volumes,
            angular_nbr,
            solid: BoundaryPatch {
                tag: PatchTag::Solid,
                nodes: vec![],
                normals: vec![],
                weights: vec![],
                positions: vec![],
            },
            outer: BoundaryPatch {
                tag: PatchTag::Outer,
                nodes: vec![],
                normals: vec![],
                weights: vec![],
                positions: vec![],
            },
        };
        mesh.solid = mesh.build_patch(PatchTag::Solid);
        mesh.outer = mesh.build_patch(PatchTag::Outer);
        Ok(mesh)
    }

    fn build_patch(&self, tag: PatchTag) -> BoundaryPatch {
        let (i, radius, sign) = match tag {
            PatchTag::Solid => (0, self.spec.r_s, -1.0),
            PatchTag::Outer => (self.res.n_r, self.spec.r_o, 1.0),
        };
        let mut patch = BoundaryPatch {
            tag,
            nodes: vec![],
            normals: vec![],
            weights: vec![],
            positions: vec![],
        };
        let [_, dth, dps] = self.spacing;
        for k in 0..self.res.n_phi {
            for j in 0..self.res.n_theta {
                let n = self.index(i, j, k);
                let w = if self.spec.dim == 2 {
                    radius * dth
                } else {
                    let th = (j as f64 + 0.5) * dth;
                    radius * radius * dps * ((th - 0.5 * dth).cos() - (th + 0.5 * dth).cos())
                };
                patch.nodes.push(n);
                patch.normals.push(self.radial_dir[n] * sign);
                patch.weights.push(w);
                patch.positions.push(self.positions[n]);
            }
        }
        patch
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn resolution(&self) -> Resolution {
        self.res
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.positions.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cell_volumes.len()
    }

    /// Radial node layers (`n_r + 1`).
    pub fn radial_layers(&self) -> usize {
        self.nr1
    }

    /// Logical spacings `(Δξ, Δθ, Δψ)`.
    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nr1 * (j + self.res.n_theta * k)
    }

    #[inline]
    pub fn node_index(&self, n: usize) -> NodeIndex {
        let i = n % self.nr1;
        let rest = n / self.nr1;
        NodeIndex {
            i,
            j: rest % self.res.n_theta,
            k: rest / self.res.n_theta,
        }
    }

    #[inline]
    pub fn radial_index(&self, n: usize) -> usize {
        n % self.nr1
    }

    pub fn position(&self, n: usize) -> Vec3 {
        self.positions[n]
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    /// Rows are the logical-coordinate gradients `∇ξ^a`.
    #[inline]
    pub fn inverse_chart(&self, n: usize) -> &Mat3 {
        &self.dxi_dx[n]
    }

    /// `|∂x/∂ξ|`: physical length per unit of the wall-normal coordinate.
    pub fn radial_length(&self, n: usize) -> f64 {
        self.radial_length[n]
    }

    /// Unit radial direction `e` of the chart at the node.
    pub fn radial_direction(&self, n: usize) -> Vec3 {
        self.radial_dir[n]
    }

    /// Quadrature weights of the dual cells; they sum to the exact area/volume.
    pub fn node_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cell_volumes(&self) -> &[f64] {
        &self.cell_volumes
    }

    pub fn total_volume(&self) -> f64 {
        self.cell_volumes.iter().sum()
    }

    pub fn patch(&self, tag: PatchTag) -> &BoundaryPatch {
        match tag {
            PatchTag::Solid => &self.solid,
            PatchTag::Outer => &self.outer,
        }
    }

    pub fn solid_patch(&self) -> &BoundaryPatch {
        &self.solid
    }

    pub fn outer_patch(&self) -> &BoundaryPatch {
        &self.outer
    }

    pub fn is_boundary(&self, n: usize) -> bool {
        let i = self.radial_index(n);
        i == 0 || i == self.res.n_r
    }

    /// Wall-normal coordinate of the node.
    pub fn xi(&self, n: usize) -> f64 {
        self.radial_index(n) as f64 * self.spacing[0]
    }

    /// Physical distance (along the chart) to the nearer wall.
    pub fn wall_distance(&self, n: usize) -> f64 {
        let xi = self.xi(n);
        xi.min(1.0 - xi) * self.radial_length[n]
    }

    /// Number of logical axes in use.
    #[inline]
    pub fn axes(&self) -> usize {
        self.spec.dim
    }

    /// Node reached by moving `offset ∈ {-2,-1,1,2}` along angular axis
    /// `axis ∈ {1, 2}`; crossing a pole lands on the opposite meridian.
    #[inline]
    pub fn angular_neighbour(&self, n: usize, axis: usize, offset: isize) -> usize {
        let slot = match offset {
            -2 => 0,
            -1 => 1,
            1 => 2,
            2 => 3,
            _ => panic!("angular offset {offset} out of range"),
        };
        self.angular_nbr[axis - 1][n / self.nr1][slot] * self.nr1 + n % self.nr1
    }

    /// Second-order logical derivative `∂f/∂ξ^axis` at node `n`.
    #[inline]
    pub fn logical_derivative<T>(&self, f: &[T], n: usize, axis: usize) -> T
    where
        T: Copy + std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let h = self.spacing[axis];
        if axis == 0 {
            let i = n % self.nr1;
            if i == 0 {
                ((f[n + 1] - f[n]) * 4.0 - (f[n + 2] - f[n])) * (0.5 / h)
            } else if i == self.res.n_r {
                ((f[n] - f[n - 1]) * 4.0 - (f[n] - f[n - 2])) * (0.5 / h)
            } else {
                (f[n + 1] - f[n - 1]) * (0.5 / h)
            }
        } else {
            let nb = &self.angular_nbr[axis - 1][n / self.nr1];
            let i = n % self.nr1;
            (f[nb[2] * self.nr1 + i] - f[nb[1] * self.nr1 + i]) * (0.5 / h)
        }
    }

    /// Undivided fourth difference along `axis`; `None` on the two radial
    /// layers next to each wall, where the centred stencil does not fit.
    #[inline]
    pub fn fourth_difference<T>(&self, f: &[T], n: usize, axis: usize) -> Option<T>
    where
        T: Copy + std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let (m2, m1, p1, p2) = if axis == 0 {
            let i = n % self.nr1;
            if i < 2 || i + 2 > self.res.n_r {
                return None;
            }
            (n - 2, n - 1, n + 1, n + 2)
        } else {
            let nb = &self.angular_nbr[axis - 1][n / self.nr1];
            let i = n % self.nr1;
            (
                nb[0] * self.nr1 + i,
                nb[1] * self.nr1 + i,
                nb[2] * self.nr1 + i,
                nb[3] * self.nr1 + i,
            )
        };
        Some((f[m2] - f[n]) + (f[p2] - f[n]) - ((f[m1] - f[n]) + (f[p1] - f[n])) * 4.0)
    }

    /// `|∇ξ^axis|` at a node.
    #[inline]
    pub fn logical_gradient_norm(&self, n: usize, axis: usize) -> f64 {
        self.dxi_dx[n].row(axis).norm()
    }

    /// Cartesian gradient of a scalar field.
    #[inline]
    pub fn gradient(&self, f: &[f64], n: usize) -> Vec3 {
        let inv = &self.dxi_dx[n];
        let mut g = Vec3::zeros();
        for a in 0..self.axes() {
            let d = self.logical_derivative(f, n, a);
            g += inv.row(a).transpose() * d;
        }
        g
    }

    /// Cartesian Jacobian `(∂_j f_i)` of a vector field.
    #[inline]
    pub fn vector_gradient(&self, f: &[Vec3], n: usize) -> Mat3 {
        let inv = &self.dxi_dx[n];
        let mut g = Mat3::zeros();
        for a in 0..self.axes() {
            let d = self.logical_derivative(f, n, a);
            g += d * inv.row(a);
        }
        g
    }

    /// Discrete curl of a vector field (only the `z` component is non-zero
    /// for planar fields).
    pub fn curl(&self, f: &[Vec3], n: usize) -> Vec3 {
        let g = self.vector_gradient(f, n);
        Vec3::new(g[(2, 1)] - g[(1, 2)], g[(0, 2)] - g[(2, 0)], g[(1, 0)] - g[(0, 1)])
    }

    /// Smooth extension of the boundary normal: `ν = w(ξ)·e` with `w = -1`
    /// on the solid, `+1` on the outer wall, and a smoothstep blend to zero
    /// at mid-gap.
    pub fn extended_normal(&self) -> NormalExtension {
        let nu = (0..self.num_nodes())
            .map(|n| {
                let xi = self.xi(n);
                let w = if xi <= 0.5 {
                    -(1.0 - smoothstep(2.0 * xi))
                } else {
                    1.0 - smoothstep(2.0 * (1.0 - xi))
                };
                self.radial_dir[n] * w
            })
            .collect();
        NormalExtension { nu }
    }

    /// L² norm of a nodal scalar field with the mesh quadrature weights.
    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        f.iter()
            .zip(&self.weights)
            .map(|(v, w)| w * v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Extension of the boundary normal for a mesh.
pub fn extended_normal(mesh: &Mesh) -> NormalExtension {
    mesh.extended_normal()
}

fn cell_volumes(spec: &DomainSpec, res: &Resolution, spacing: [f64; 3]) -> Vec<f64> {
    let o = spec.outer_center();
    let dr = spec.r_o - spec.r_s;
    let [dxi, dth, dps] = spacing;
    let mut out = Vec::with_capacity(res.n_r * res.n_theta * res.n_phi);
    for k in 0..res.n_phi {
        for j in 0..res.n_theta {
            for i in 0..res.n_r {
                let (r_lo, r_hi) = (
                    spec.r_s + dr * i as f64 * dxi,
                    spec.r_s + dr * (i + 1) as f64 * dxi,
                );
                let v = if spec.dim == 2 {
                    let (a, b) = (j as f64 * dth, (j + 1) as f64 * dth);
                    let int_e = Vec3::new(b.sin() - a.sin(), a.cos() - b.cos(), 0.0);
                    0.5 * (r_hi * r_hi - r_lo * r_lo) * dth
                        + 0.5 * (r_lo + r_hi) * dxi * o.dot(&int_e)
                } else {
                    let (a, b) = (j as f64 * dth, (j + 1) as f64 * dth);
                    let (c, d) = (k as f64 * dps, (k + 1) as f64 * dps);
                    let sin2 = |t: f64| 0.5 * t - 0.25 * (2.0 * t).sin();
                    let int_sin2 = sin2(b) - sin2(a);
                    let int_e = Vec3::new(
                        int_sin2 * (d.sin() - c.sin()),
                        int_sin2 * (c.cos() - d.cos()),
                        0.5 * (b.sin().powi(2) - a.sin().powi(2)) * dps,
                    );
                    (r_hi.powi(3) - r_lo.powi(3)) / 3.0 * dps * (a.cos() - b.cos())
                        + (r_hi.powi(3) - r_lo.powi(3)) / (3.0 * dr) * o.dot(&int_e)
                };
                out.push(v);
            }
        }
    }
    out
}

/// Angular neighbour tables indexed by the angular part `j + n_theta·k`.
fn angular_neighbours(dim: usize, _nr1: usize, res: &Resolution) -> [Vec<[usize; 4]>; 2] {
    let nt = res.n_theta as isize;
    let np = res.n_phi as isize;
    let flat = |j: isize, k: isize| (j + nt * k) as usize;
    let mut theta = Vec::with_capacity((nt * np) as usize);
    let mut phi = Vec::with_capacity((nt * np) as usize);
    for k in 0..np {
        for j in 0..nt {
            let mut t = [0usize; 4];
            let mut p = [0usize; 4];
            for (slot, off) in [-2isize, -1, 1, 2].into_iter().enumerate() {
                if dim == 2 {
                    t[slot] = flat((j + off).rem_euclid(nt), 0);
                } else {
                    let mut jj = j + off;
                    let mut kk = k;
                    if jj < 0 {
                        jj = -jj - 1;
                        kk = (k + np / 2) % np;
                    } else if jj >= nt {
                        jj = 2 * nt - jj - 1;
                        kk = (k + np / 2) % np;
                    }
                    t[slot] = flat(jj, kk);
                    p[slot] = flat(j, (k + off).rem_euclid(np));
                }
            }
            theta.push(t);
            phi.push(p);
        }
    }
    [theta, phi]
}
