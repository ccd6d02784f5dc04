//! Run configuration: JSON schema, silicon nanobar defaults and dotted-path
//! overrides for the CLI.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{BoundaryConditions, MechBc, ThermBc};
use crate::material::{Material, MaterialBaseline, MaterialLaws};
use crate::static_solver::LoadProgram;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("bad --set override '{0}': expected key=value")]
    BadOverride(String),
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    /// Reference length L0 [m].
    pub length: f64,
    pub width: f64,
    pub thickness: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self { length: 100e-9, width: 10e-9, thickness: 10e-9 }
    }
}

impl Geometry {
    pub fn area(&self) -> f64 {
        self.width * self.thickness
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: crate::static_solver::DEFAULT_TOL, max_iter: crate::static_solver::DEFAULT_MAX_ITER }
    }
}

/// Parameter varied by `sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Bar length [m].
    Length,
    /// Pre-strain dL/L [-].
    Prestrain,
    /// Heating per unit length [W/m].
    Power,
    /// End traction [Pa].
    Traction,
    /// Young's-modulus temperature exponent [1/K].
    Upsilon,
    /// Conductivity temperature exponent [1/K].
    Beta,
    /// Conductivity strain coefficient [-].
    Chi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        // 20-400 nm, log spaced.
        let n = 40;
        let (lo, hi) = (20e-9f64, 400e-9f64);
        let values = (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect();
        Self { axis: SweepAxis::Length, values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub material: Material,
    pub bcs: BoundaryConditions,
    pub loads: LoadProgram,
    pub solver: SolverSettings,
    pub n_elem: usize,
    pub sweep: SweepSpec,
    /// Default CSV output path; `--out` overrides.
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry::default(),
            material: Material::new(MaterialBaseline::silicon(), MaterialLaws::default()),
            bcs: BoundaryConditions::fixed_fixed_isothermal(300.0),
            loads: LoadProgram::default(),
            solver: SolverSettings::default(),
            n_elem: 100,
            sweep: SweepSpec::default(),
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse JSON, apply `key=value` dotted-path overrides, re-validate.
    pub fn from_json_with_overrides(text: &str, sets: &[String]) -> Result<Self, ConfigError> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for set in sets {
            let (key, raw) = set
                .split_once('=')
                .ok_or_else(|| ConfigError::BadOverride(set.clone()))?;
            let parsed: serde_json::Value =
                serde_json::from_str(raw).unwrap_or(serde_json::Value::String(raw.to_string()));
            set_path(&mut value, key, parsed)?;
        }
        let cfg: Self =
            serde_json::from_value(value).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.geometry;
        if !(g.length > 0.0 && g.width > 0.0 && g.thickness > 0.0) {
            return Err(ConfigError::Invalid("geometry dimensions must be positive".into()));
        }
        self.material
            .baseline
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.material
            .laws
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.bcs.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.n_elem < 1 {
            return Err(ConfigError::Invalid("n_elem must be >= 1".into()));
        }
        if self.loads.n_steps < 1 {
            return Err(ConfigError::Invalid("loads.n_steps must be >= 1".into()));
        }
        if !(self.solver.tol > 0.0) {
            return Err(ConfigError::Invalid("solver.tol must be positive".into()));
        }
        for bc in [self.bcs.therm_left, self.bcs.therm_right] {
            if let ThermBc::Isothermal { temperature } = bc {
                if !(temperature > 0.0) {
                    return Err(ConfigError::Invalid("isothermal temperature must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Config with the sweep-axis value applied.
    pub fn at_sweep_point(&self, value: f64) -> Self {
        let mut c = self.clone();
        match self.sweep.axis {
            SweepAxis::Length => c.geometry.length = value,
            SweepAxis::Prestrain => c.loads.prestrain = value,
            SweepAxis::Power => c.loads.linear_power = value,
            SweepAxis::Traction => c.loads.traction = value,
            SweepAxis::Upsilon => c.material.laws.upsilon = value,
            SweepAxis::Beta => c.material.laws.beta = value,
            SweepAxis::Chi => c.material.laws.chi = value,
        }
        c
    }

    /// Short labels echoed into CSV rows.
    pub fn bc_labels(&self) -> (String, String) {
        let mech = |b: MechBc| match b {
            MechBc::Fixed => "fixed".to_string(),
            MechBc::Free { traction } => format!("free({traction})"),
        };
        let therm = |b: ThermBc| match b {
            ThermBc::Isothermal { temperature } => format!("isothermal({temperature})"),
            ThermBc::Adiabatic => "adiabatic".to_string(),
            ThermBc::Flux { flux } => format!("flux({flux})"),
        };
        (
            format!("{}-{}", mech(self.bcs.mech_left), mech(self.bcs.mech_right)),
            format!("{}-{}", therm(self.bcs.therm_left), therm(self.bcs.therm_right)),
        )
    }
}

fn set_path(
    root: &mut serde_json::Value,
    key: &str,
    new: serde_json::Value,
) -> Result<(), ConfigError> {
    let mut cursor = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i == parts.len() - 1;
        let obj = cursor
            .as_object_mut()
            .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        if last {
            obj.insert(part.to_string(), new);
            return Ok(());
        }
        cursor = obj
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    Err(ConfigError::UnknownKey(key.to_string()))
}
