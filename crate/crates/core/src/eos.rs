//! Equation of state in pressure/entropy variables.
//!
//! The fluid is described by `(p, u, s)`, so density and sound speed are
//! functions of `(p, s)`. Only the ideal-gas law `p = κ exp(s/c_v) ρ^γ` is
//! built in; other laws can implement [`EquationOfState`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ideal-gas constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EosParams {
    pub gamma: f64,
    pub kappa: f64,
    pub c_v: f64,
}

impl Default for EosParams {
    fn default() -> Self {
        Self {
            gamma: 1.4,
            kappa: 1.0,
            c_v: 1.0,
        }
    }
}

impl EosParams {
    pub fn new(gamma: f64, kappa: f64, c_v: f64) -> Result<Self> {
        let eos = Self { gamma, kappa, c_v };
        eos.validate()?;
        Ok(eos)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0) {
            return Err(Error::Validation(format!(
                "eos.gamma must be > 1 (got {})",
                self.gamma
            )));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::Validation(format!(
                "eos.kappa must be > 0 (got {})",
                self.kappa
            )));
        }
        if !(self.c_v > 0.0) {
            return Err(Error::Validation(format!(
                "eos.c_v must be > 0 (got {})",
                self.c_v
            )));
        }
        Ok(())
    }
}

/// A thermodynamic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPair {
    pub p: f64,
    pub s: f64,
}

impl ThermoPair {
    pub fn new(p: f64, s: f64) -> Self {
        Self { p, s }
    }
}

/// Axis-aligned box in `(p, s)` where the system is known to be hyperbolic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityBox {
    pub p_min: f64,
    pub p_max: f64,
    pub s_min: f64,
    pub s_max: f64,
}

impl Default for HyperbolicityBox {
    fn default() -> Self {
        Self {
            p_min: 1e-2,
            p_max: 1e2,
            s_min: -10.0,
            s_max: 10.0,
        }
    }
}

impl HyperbolicityBox {
    pub fn new(p_min: f64, p_max: f64, s_min: f64, s_max: f64) -> Result<Self> {
        let b = Self {
            p_min,
            p_max,
            s_min,
            s_max,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_min > 0.0) {
            return Err(Error::Validation(format!(
                "eos.p_min must be > 0 (got {})",
                self.p_min
            )));
        }
        if !(self.p_min < self.p_max) {
            return Err(Error::Validation(format!(
                "eos.p_min < eos.p_max violated ({} >= {})",
                self.p_min, self.p_max
            )));
        }
        if !(self.s_min < self.s_max) {
            return Err(Error::Validation(format!(
                "eos.s_min < eos.s_max violated ({} >= {})",
                self.s_min, self.s_max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, tp: ThermoPair) -> bool {
        tp.p >= self.p_min && tp.p <= self.p_max && tp.s >= self.s_min && tp.s <= self.s_max
    }

    pub fn check(&self, tp: ThermoPair) -> Result<()> {
        if self.contains(tp) {
            Ok(())
        } else {
            Err(Error::OutsideHyperbolicity {
                p: tp.p,
                s: tp.s,
                bounds: *self,
                node: None,
            })
        }
    }

    /// Whether `inner` lies inside `self`.
    pub fn encloses(&self, inner: &HyperbolicityBox) -> bool {
        inner.p_min >= self.p_min
            && inner.p_max <= self.p_max
            && inner.s_min >= self.s_min
            && inner.s_max <= self.s_max
    }
}

/// Density and sound speed as functions of `(p, s)`.
pub trait EquationOfState {
    fn density(&self, tp: ThermoPair) -> Result<f64>;
    fn sound_speed(&self, tp: ThermoPair) -> Result<f64>;
}

impl EquationOfState for EosParams {
    fn density(&self, tp: ThermoPair) -> Result<f64> {
        if !(tp.p > 0.0) {
            return Err(Error::NonPositivePressure { p: tp.p });
        }
        Ok((tp.p * (-tp.s / self.c_v).exp() / self.kappa).powf(1.0 / self.gamma))
    }

    fn sound_speed(&self, tp: ThermoPair) -> Result<f64> {
        let rho = self.density(tp)?;
        Ok((self.gamma * tp.p / rho).sqrt())
    }
}

pub fn density(tp: ThermoPair, eos: &impl EquationOfState) -> Result<f64> {
    eos.density(tp)
}

pub fn sound_speed(tp: ThermoPair, eos: &impl EquationOfState) -> Result<f64> {
    eos.sound_speed(tp)
}

/// Symmetrizer coefficients `(α, η) = (ρc², ρ)` at a state inside `bounds`.
pub fn symmetrizer_coefficients(
    tp: ThermoPair,
    eos: &impl EquationOfState,
    bounds: &HyperbolicityBox,
) -> Result<(f64, f64)> {
    bounds.check(tp)?;
    let eta = eos.density(tp)?;
    let c = eos.sound_speed(tp)?;
    Ok((eta * c * c, eta))
}

/// Unchecked ideal-gas evaluation used in the inner loops once the box
/// check has been done: returns `(α, η, c)`.
#[inline]
pub(crate) fn ideal_coefficients(eos: &EosParams, p: f64, s: f64) -> (f64, f64, f64) {
    let eta = (p * (-s / eos.c_v).exp() / eos.kappa).powf(1.0 / eos.gamma);
    let alpha = eos.gamma * p;
    (alpha, eta, (alpha / eta).sqrt())
}
