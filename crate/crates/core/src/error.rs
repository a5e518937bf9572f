use thiserror::Error;

use crate::eos::HyperbolicityBox;

/// Everything that can go wrong while building or advancing a simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-positive pressure p = {p}: density is undefined")]
    NonPositivePressure { p: f64 },

    #[error("state (p = {p}, s = {s}) left the hyperbolicity box {bounds:?}{}", node_suffix(*node))]
    OutsideHyperbolicity {
        p: f64,
        s: f64,
        bounds: HyperbolicityBox,
        node: Option<usize>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mesh construction failed: {0}")]
    Construction(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("point is not on the {0} boundary patch")]
    NotOnPatch(&'static str),

    #[error("flow map degenerated at node {node}: det J1 = {det:.3e} below floor {floor:.1e}")]
    Degenerate { node: usize, det: f64, floor: f64 },

    #[error("time step {dt:.3e} exceeds the stability limit {limit:.3e}")]
    StepSize { dt: f64, limit: f64 },

    #[error("compatibility order {0} is not supported (maximum 2)")]
    UnsupportedOrder(usize),

    #[error("insufficient history: {0}")]
    InsufficientHistory(&'static str),

    #[error("guess does not start at the current solid velocity (gap {gap:.3e})")]
    Continuity { gap: f64 },

    #[error("Picard iteration did not converge in {iterations} iterations (last distance {distance:.3e})")]
    NonConvergence { iterations: usize, distance: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("at t = {t:.6}, step {step}: {source}")]
    Runtime {
        t: f64,
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

fn node_suffix(node: Option<usize>) -> String {
    node.map(|n| format!(" at node {n}")).unwrap_or_default()
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn at_node(self, node: usize) -> Self {
        match self {
            Error::OutsideHyperbolicity { p, s, bounds, .. } => Error::OutsideHyperbolicity {
                p,
                s,
                bounds,
                node: Some(node),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
