use nalgebra::{DMatrix, SMatrix};
use rayon::prelude::*;

use crate::eos::{symmetrizer_coefficients, ThermoPair};
use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::kinematics::{tensor_zero, Configuration, SolidVelocity, Tensor3};
use crate::{Mat3, Vec3};

use super::FluidParams;

/// Geometric coefficients of the fixed-domain system at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeFrame {
    /// `𝒥₁⁻¹`.
    pub jinv: Mat3,
    /// `M = 𝒥₁ᵀ𝒥₁`.
    pub metric: Mat3,
    /// `M⁻¹`.
    pub metric_inv: Mat3,
    /// `ū_S = 𝒥₁⁻¹ V(φ)`.
    pub us: Vec3,
    /// `𝒥₁⁻¹𝒥₂`, indexed like `𝒥₂`.
    pub c: Tensor3,
    /// `𝒥₁⁻¹ ∇V(φ) 𝒥₁`.
    pub k: Mat3,
    /// `t_j = Σ (𝒥₁⁻¹)_{ki} (𝒥₂)_{ijk}`: the divergence correction.
    pub tvec: Vec3,
}

impl NodeFrame {
    pub fn identity() -> Self {
        Self {
            jinv: Mat3::identity(),
            metric: Mat3::identity(),
            metric_inv: Mat3::identity(),
            us: Vec3::zeros(),
            c: tensor_zero(),
            k: Mat3::zeros(),
            tvec: Vec3::zeros(),
        }
    }

    /// `C[a, b]_i = Σ C_{ijk} a_j b_k`.
    #[inline]
    pub fn c_apply(&self, a: &Vec3, b: &Vec3) -> Vec3 {
        Vec3::new(
            a.dot(&(self.c[0] * b)),
            a.dot(&(self.c[1] * b)),
            a.dot(&(self.c[2] * b)),
        )
    }
}

/// Per-node coefficients at one instant together with the solid velocity
/// that produced them.
#[derive(Debug, Clone)]
pub struct Frame {
    pub t: f64,
    pub theta: SolidVelocity,
    pub nodes: Vec<NodeFrame>,
    /// All nodes carry the identity frame.
    pub trivial: bool,
}

impl Frame {
    pub fn identity(mesh: &Mesh, t: f64) -> Self {
        Self {
            t,
            theta: SolidVelocity::zero(),
            nodes: vec![NodeFrame::identity(); mesh.num_nodes()],
            trivial: true,
        }
    }

    pub fn new(mesh: &Mesh, conf: &Configuration, theta: &SolidVelocity, t: f64) -> Result<Self> {
        let cutoff = mesh.spec().cutoff();
        let motion = conf.rigid_motion(theta);
        let nodes: Vec<Result<NodeFrame>> = (0..mesh.num_nodes())
            .into_par_iter()
            .map(|n| {
                let j1 = conf.j1[n];
                let jinv = j1.try_inverse().ok_or(Error::Degenerate {
                    node: n,
                    det: j1.determinant(),
                    floor: 0.0,
                })?;
                let jet = motion.jet(&cutoff, &conf.phi[n]);
                let j2 = &conf.j2[n];
                let mut c = tensor_zero();
                for (i, ci) in c.iter_mut().enumerate() {
                    *ci = j2[0] * jinv[(i, 0)] + j2[1] * jinv[(i, 1)] + j2[2] * jinv[(i, 2)];
                }
                let mut tvec = Vec3::zeros();
                for (i, j2i) in j2.iter().enumerate() {
                    tvec += j2i * jinv.column(i);
                }
                Ok(NodeFrame {
                    jinv,
                    metric: j1.transpose() * j1,
                    metric_inv: jinv * jinv.transpose(),
                    us: jinv * jet.v,
                    c,
                    k: jinv * jet.grad * j1,
                    tvec,
                })
            })
            .collect();
        let nodes = nodes.into_iter().collect::<Result<Vec<_>>>()?;
        let id = NodeFrame::identity();
        let trivial = nodes.iter().all(|f| *f == id);
        Ok(Self {
            t,
            theta: *theta,
            nodes,
            trivial,
        })
    }
}

pub type Mat5 = SMatrix<f64, 5, 5>;

/// Symmetrizer, flux matrices and zeroth-order matrix at one node, in the
/// variable order `(p̄, ū₁, ū₂, ū₃, s̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub a0: Mat5,
    /// `𝒜ʲ = Aʲ + ε νʲ I`.
    pub aj: [Mat5; 3],
    pub b: Mat5,
}

impl CoefficientSet {
    /// Restriction to the `dim + 2` active variables.
    pub fn reduce(m: &Mat5, dim: usize) -> DMatrix<f64> {
        let idx: Vec<usize> = if dim == 2 { vec![0, 1, 2, 4] } else { vec![0, 1, 2, 3, 4] };
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
    }

    /// `Σ 𝒜ʲ nⱼ`.
    pub fn normal_matrix(&self, n: &Vec3) -> Mat5 {
        self.aj[0] * n.x + self.aj[1] * n.y + self.aj[2] * n.z
    }
}

/// Assemble `A⁰`, `𝒜ʲ` and `B` at `node` for the state `(p, u, s)`.
pub fn assemble_coefficients(
    frame: &NodeFrame,
    state: (f64, Vec3, f64),
    params: &FluidParams,
    eps: f64,
    nu: &Vec3,
) -> Result<CoefficientSet> {
    let (p, u, s) = state;
    let (alpha, eta) = symmetrizer_coefficients(ThermoPair::new(p, s), &params.eos, &params.bounds)?;
    let v = u - frame.us;
    let em = frame.metric * eta;
    let mut a0 = Mat5::zeros();
    a0[(0, 0)] = 1.0 / alpha;
    a0.fixed_view_mut::<3, 3>(1, 1).copy_from(&em);
    a0[(4, 4)] = 1.0;
    let mut aj = [Mat5::zeros(); 3];
    for (j, a) in aj.iter_mut().enumerate() {
        a[(0, 0)] = v[j] / alpha;
        a[(0, 1 + j)] = 1.0;
        a[(1 + j, 0)] = 1.0;
        a.fixed_view_mut::<3, 3>(1, 1).copy_from(&(em * v[j]));
        a[(4, 4)] = v[j];
        *a += Mat5::identity() * (eps * nu[j]);
    }
    let mut b = Mat5::zeros();
    for j in 0..3 {
        b[(0, 1 + j)] = frame.tvec[j];
    }
    let mut cv = Mat3::zeros();
    for i in 0..3 {
        cv.set_row(i, &(frame.c[i] * v).transpose());
    }
    b.fixed_view_mut::<3, 3>(1, 1).copy_from(&(em * (cv + frame.k)));
    Ok(CoefficientSet { a0, aj, b })
}
