//! Temperature- and strain-dependent material property evaluation.
//!
//! All properties are evaluated pointwise at a [`LocalState`] (temperature and
//! reference displacement gradient at a quadrature point). The parametric laws
//! are
//!
//! ```text
//! Y(T)      = Y0 * exp(upsilon * (T - T0))
//! k(T, u')  = k0 * exp(beta * (T - T0)) * (1 - chi * u')
//! ```
//!
//! and zeroing `upsilon`, `beta`, `chi` recovers the constant-property material
//! bitwise.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Baseline (reference-temperature) material constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaterialBaseline {
    /// Young's modulus at T0 [Pa].
    pub y0: f64,
    /// Poisson's ratio [-]. Unused by the 1-D kernel, kept for config fidelity.
    pub nu: f64,
    /// Reference density [kg/m^3].
    pub rho0: f64,
    /// Thermal expansion coefficient [1/K].
    pub alpha0: f64,
    /// Thermal conductivity at T0 [W/(m K)].
    pub k0: f64,
    /// Specific heat per unit mass [J/(kg K)].
    pub cv0: f64,
    /// Reference temperature [K].
    pub t0: f64,
}

impl Default for MaterialBaseline {
    fn default() -> Self {
        Self::silicon()
    }
}

impl MaterialBaseline {
    /// Single-crystal silicon at 300 K.
    pub fn silicon() -> Self {
        Self {
            y0: 165e9,
            nu: 0.22,
            rho0: 2300.0,
            alpha0: 2.6e-6,
            k0: 159.0,
            cv0: 713.0,
            t0: 300.0,
        }
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        let ok = self.y0 > 0.0
            && self.rho0 > 0.0
            && self.k0 > 0.0
            && self.cv0 > 0.0
            && self.t0 > 0.0
            && self.alpha0.is_finite()
            && self.nu.is_finite();
        if ok {
            Ok(())
        } else {
            Err(MaterialError::InvalidBaseline)
        }
    }
}

/// Parameters of the temperature/strain dependence laws. All zero gives the
/// linear material.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MaterialLaws {
    /// Young's-modulus temperature exponent [1/K].
    pub upsilon: f64,
    /// Conductivity temperature exponent [1/K].
    pub beta: f64,
    /// Conductivity strain coefficient [-].
    pub chi: f64,
}

impl MaterialLaws {
    pub fn validate(&self) -> Result<(), MaterialError> {
        if self.upsilon.is_finite() && self.beta.is_finite() && self.chi.is_finite() {
            Ok(())
        } else {
            Err(MaterialError::InvalidLaws)
        }
    }
}

/// Local thermomechanical state at which properties are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalState {
    /// Absolute temperature at the linearization point [K].
    pub t1: f64,
    /// Reference displacement gradient du1/dx0 [-].
    pub du_dx: f64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MaterialError {
    #[error("composed thermal conductivity is non-positive ({value} W/(m K)); strain law driven past its validity range")]
    NonPositiveConductivity { value: f64 },
    #[error("material baseline violates positivity constraints")]
    InvalidBaseline,
    #[error("material law parameters must be finite")]
    InvalidLaws,
}

/// Baseline constants plus parametric laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Material {
    pub baseline: MaterialBaseline,
    pub laws: MaterialLaws,
}

impl Default for Material {
    fn default() -> Self {
        Self { baseline: MaterialBaseline::silicon(), laws: MaterialLaws::default() }
    }
}

impl Material {
    pub fn new(baseline: MaterialBaseline, laws: MaterialLaws) -> Self {
        Self { baseline, laws }
    }

    /// Y(T) = Y0 exp(upsilon (T - T0)). Strictly positive.
    pub fn young_modulus(&self, s: &LocalState) -> f64 {
        self.baseline.y0 * (self.laws.upsilon * (s.t1 - self.baseline.t0)).exp()
    }

    /// k(T, u') = k0 exp(beta (T - T0)) (1 - chi u'). The two laws compose
    /// multiplicatively; zeroing one parameter recovers the other study.
    pub fn conductivity(&self, s: &LocalState) -> Result<f64, MaterialError> {
        let k = self.baseline.k0
            * (self.laws.beta * (s.t1 - self.baseline.t0)).exp()
            * (1.0 - self.laws.chi * s.du_dx);
        if k > 0.0 {
            Ok(k)
        } else {
            Err(MaterialError::NonPositiveConductivity { value: k })
        }
    }

    /// dk/dT at fixed strain, used by the static solver's thermal tangent.
    pub fn conductivity_dtemp(&self, s: &LocalState) -> Result<f64, MaterialError> {
        Ok(self.laws.beta * self.conductivity(s)?)
    }

    /// 1-D thermal stress modulus M = -alpha0 Y(T) [Pa/K]. Tensile stress
    /// decreases with temperature rise.
    pub fn thermal_stress_modulus(&self, s: &LocalState) -> f64 {
        -self.baseline.alpha0 * self.young_modulus(s)
    }
}
