//! Rigid body moving in a compressible inviscid fluid.
//!
//! The moving fluid domain is pulled back to the fixed reference domain
//! `F(0)` by a flow map generated by a cut-off extension of the rigid
//! velocity. On that fixed domain the fluid is a quasilinear symmetric
//! hyperbolic system in `(p̄, ū, s̄)`, coupled through its boundary pressure
//! to the Newton-Euler equations of the body. An optional `ε` shift makes
//! the boundary non-characteristic.
//!
//! Module map:
//!
//! - [`eos`]: ideal-gas law in `(p, s)` variables and symmetrizer coefficients
//! - [`geometry`]: annulus/shell meshes, boundary patches, cutoff, normal extension
//! - [`kinematics`]: solid velocity, flow-map configuration and its ODE block
//! - [`fluid`]: coefficient assembly, spatial operator, boundary closure, time stepping
//! - [`solid`]: mass properties, surface loads, rigid-body ODE
//! - [`coupling`]: Picard map, sub-iterated and windowed coupling, full runs
//! - [`diagnostics`]: conormal energies and transport residuals
//! - [`scenario`]: configuration files and initial-data presets
//! - [`experiments`]: ε-sweep and refinement drivers
//! - [`io`]: time-series and snapshot writers

pub mod coupling;
pub mod diagnostics;
pub mod eos;
mod error;
pub mod experiments;
pub mod fluid;
pub mod geometry;
pub mod io;
pub mod kinematics;
pub mod scenario;
pub mod solid;

pub use error::{Error, Result};

pub use coupling::{CoupledState, CouplingConfig, CouplingMode, Trajectory};
pub use diagnostics::DiagnosticsRecord;
pub use eos::{EosParams, HyperbolicityBox, ThermoPair};
pub use fluid::{FluidField, Regularization};
pub use geometry::{DomainSpec, Mesh, Resolution};
pub use kinematics::{Configuration, SolidVelocity};
pub use scenario::Scenario;
pub use solid::BodyProps;

/// Fixed-size 3-vector; planar problems keep the third component zero.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Fixed-size 3×3 matrix; planar problems carry a trivial third row/column.
pub type Mat3 = nalgebra::Matrix3<f64>;
