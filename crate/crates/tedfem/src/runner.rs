//! High-level run orchestration shared by the CLI and the integration tests:
//! single quality-factor runs, parameter sweeps and the two validation
//! commands, with deterministic CSV emission.

use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::analytic;
use crate::assembly::{assemble, AssemblyError, BoundaryConditions, MechBc, ThermBc};
use crate::config::{ConfigError, RunConfig, SweepAxis};
use crate::eigen::{analyze, EigenError, EigenResult};
use crate::element::ElementLoads;
use crate::mesh::{Mesh1D, MeshError};
use crate::static_solver::{solve_static, BaseState, SolverError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<AssemblyError> for RunError {
    fn from(e: AssemblyError) -> Self {
        RunError::Solver(SolverError::Assembly(e))
    }
}

impl RunError {
    /// CLI exit code: 2 config, 3 solver, 4 eigensolver.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Mesh(_) => 2,
            RunError::Solver(_) => 3,
            RunError::Eigen(_) => 4,
            RunError::Io(_) => 1,
        }
    }
}

/// Full double precision so golden-file comparisons stay meaningful.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Boundary conditions seen by the eigenproblem: a pre-strained end is
/// re-declared fixed after the static ramp.
pub fn eigen_bcs(config: &RunConfig) -> BoundaryConditions {
    let mut bcs = config.bcs;
    if config.loads.prestrain != 0.0 {
        bcs.mech_right = MechBc::Fixed;
    }
    bcs
}

/// Reference frequency for normalized shifts: the linear, unloaded, uncoupled
/// fundamental of the same mesh resolution at L = 100 nm.
pub fn omega0_reference(config: &RunConfig) -> Result<f64, RunError> {
    let mut c = config.clone();
    c.geometry.length = 100e-9;
    c.material.baseline.alpha0 = 0.0;
    c.material.laws = Default::default();
    c.loads = crate::static_solver::LoadProgram { n_steps: 1, ..Default::default() };
    c.bcs = eigen_bcs(config);
    let point = run_point(&c, 0.0)?;
    Ok(point.eigen.omega)
}

/// Result of one static-plus-eigen solve.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub base: BaseState,
    pub eigen: EigenResult,
}

/// Solve the base state and the eigenproblem for one configuration.
pub fn run_point(config: &RunConfig, omega0: f64) -> Result<PointResult, RunError> {
    config.validate()?;
    let mesh = Mesh1D::uniform(config.geometry.length, config.n_elem, config.geometry.area())?;
    let base = solve_static(
        &mesh,
        &config.material,
        &config.bcs,
        &config.loads,
        config.solver.tol,
        config.solver.max_iter,
    )?;
    let loads = ElementLoads {
        heat_source: config.loads.heat_source + config.loads.linear_power / config.geometry.area(),
        body_force: 0.0,
    };
    let sys = assemble(&mesh, &base, &config.material, &eigen_bcs(config), &loads)?;
    let eigen = analyze(&sys, omega0)?;
    Ok(PointResult { base, eigen })
}

/// One CSV row of a sweep; echoes the parameters needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub length: f64,
    pub omega_rad_s: f64,
    pub q_inverse: f64,
    pub dfreq_norm: f64,
    pub prestrain: f64,
    pub power_w_per_m: f64,
    pub upsilon: f64,
    pub beta: f64,
    pub chi: f64,
    pub bc_mech: String,
    pub bc_therm: String,
    pub n_elem: usize,
    pub converged: bool,
}

pub const SWEEP_CSV_HEADER: &str = "sweep_value,L,omega_rad_s,q_inverse,dfreq_norm,prestrain,power_W_per_m,upsilon,beta,chi,bc_mech,bc_therm,n_elem,converged";

impl SweepRow {
    fn from_config(c: &RunConfig, sweep_value: f64) -> Self {
        let (bc_mech, bc_therm) = c.bc_labels();
        Self {
            sweep_value,
            length: c.geometry.length,
            omega_rad_s: f64::NAN,
            q_inverse: f64::NAN,
            dfreq_norm: f64::NAN,
            prestrain: c.loads.prestrain,
            power_w_per_m: c.loads.linear_power,
            upsilon: c.material.laws.upsilon,
            beta: c.material.laws.beta,
            chi: c.material.laws.chi,
            bc_mech,
            bc_therm,
            n_elem: c.n_elem,
            converged: false,
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(self.sweep_value),
            fmt_f64(self.length),
            fmt_f64(self.omega_rad_s),
            fmt_f64(self.q_inverse),
            fmt_f64(self.dfreq_norm),
            fmt_f64(self.prestrain),
            fmt_f64(self.power_w_per_m),
            fmt_f64(self.upsilon),
            fmt_f64(self.beta),
            fmt_f64(self.chi),
            self.bc_mech,
            self.bc_therm,
            self.n_elem,
            self.converged,
        )
    }
}

/// Run one configuration and report it as a single sweep-format row.
pub fn run_qfactor(config: &RunConfig) -> Result<SweepRow, RunError> {
    config.validate()?;
    let omega0 = omega0_reference(config)?;
    let point = run_point(config, omega0)?;
    let mut row = SweepRow::from_config(config, config.geometry.length);
    row.omega_rad_s = point.eigen.omega;
    row.q_inverse = point.eigen.q_inverse;
    row.dfreq_norm = point.eigen.shift;
    row.converged = point.base.converged;
    Ok(row)
}

/// Run the configured sweep. Rows keep sweep order regardless of worker
/// completion order; per-point failures are recorded with `converged=false`
/// and the sweep continues.
pub fn run_sweep(config: &RunConfig, jobs: usize) -> Result<Vec<SweepRow>, RunError> {
    config.validate()?;
    if config.sweep.values.is_empty() {
        return Err(ConfigError::Invalid("sweep.values must be nonempty".into()).into());
    }
    let omega0 = omega0_reference(config)?;
    let points: Vec<RunConfig> = config
        .sweep
        .values
        .iter()
        .map(|&v| config.at_sweep_point(v))
        .collect();
    let run_one = |(value, c): (f64, &RunConfig)| -> SweepRow {
        let mut row = SweepRow::from_config(c, value);
        if let Ok(point) = run_point(c, omega0) {
            row.omega_rad_s = point.eigen.omega;
            row.q_inverse = point.eigen.q_inverse;
            row.dfreq_norm = point.eigen.shift;
            row.converged = point.base.converged;
        }
        row
    };
    let pairs: Vec<(f64, &RunConfig)> =
        config.sweep.values.iter().copied().zip(points.iter()).collect();
    let rows = if jobs <= 1 {
        pairs.into_iter().map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        pool.install(|| pairs.into_par_iter().map(run_one).collect())
    };
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for row in rows {
        writeln!(w, "{}", row.to_csv())?;
    }
    Ok(())
}

/// Finite-strain force-displacement validation against the closed-form
/// Total-Lagrangian bar law.
#[derive(Debug, Clone)]
pub struct StaticValidation {
    /// (stretch, end force, closed-form force) triples.
    pub rows: Vec<(f64, f64, f64)>,
    /// Max |F - F_ref| / max |F_ref| over the sweep.
    pub max_rel_error: f64,
}

pub fn run_validate_static(config: &RunConfig) -> Result<StaticValidation, RunError> {
    config.validate()?;
    if !matches!(config.bcs.mech_right, MechBc::Free { .. }) || config.bcs.mech_left != MechBc::Fixed
    {
        return Err(ConfigError::Invalid(
            "validate-static needs a fixed-free bar (mech_left fixed, mech_right free)".into(),
        )
        .into());
    }
    let stretches: Vec<f64> = if config.sweep.axis == SweepAxis::Prestrain {
        config.sweep.values.clone()
    } else {
        (0..=20).map(|i| 0.5 * i as f64 / 20.0).collect()
    };
    let area = config.geometry.area();
    let y0 = config.material.baseline.y0;
    let last = config.n_elem;
    let mut rows = Vec::with_capacity(stretches.len());
    for &stretch in &stretches {
        let mut c = config.clone();
        c.loads.prestrain = stretch;
        let mesh = Mesh1D::uniform(c.geometry.length, c.n_elem, area)?;
        let base = solve_static(&mesh, &c.material, &c.bcs, &c.loads, c.solver.tol, c.solver.max_iter)?;
        let force = base.reactions[last];
        let reference = area * analytic::bar_force_per_area(y0, stretch);
        rows.push((stretch, force, reference));
    }
    let scale = rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let max_rel_error = rows.iter().map(|r| (r.1 - r.2).abs()).fold(0.0, f64::max) / scale;
    Ok(StaticValidation { rows, max_rel_error })
}

pub fn write_static_csv<W: Write>(mut w: W, v: &StaticValidation) -> std::io::Result<()> {
    writeln!(w, "stretch,force_N,force_ref_N")?;
    for (s, f, r) in &v.rows {
        writeln!(w, "{},{},{}", fmt_f64(*s), fmt_f64(*f), fmt_f64(*r))?;
    }
    Ok(())
}

/// Steady nonlinear-conduction validation against the ODE shooting oracle.
#[derive(Debug, Clone)]
pub struct ThermalValidation {
    /// (x, T_fe, T_oracle) triples at the mesh nodes.
    pub rows: Vec<(f64, f64, f64)>,
    /// Max |T_fe - T_oracle| / max |T_oracle|.
    pub max_rel_error: f64,
}

pub fn run_validate_thermal(config: &RunConfig) -> Result<ThermalValidation, RunError> {
    config.validate()?;
    let t0 = config.material.baseline.t0;
    let ends_at_t0 = |bc: ThermBc| matches!(bc, ThermBc::Isothermal { temperature } if temperature == t0);
    if !(config.bcs.mech_left == MechBc::Fixed
        && config.bcs.mech_right == MechBc::Fixed
        && ends_at_t0(config.bcs.therm_left)
        && ends_at_t0(config.bcs.therm_right))
    {
        return Err(ConfigError::Invalid(
            "validate-thermal needs a fixed-fixed bar with both ends isothermal at T0".into(),
        )
        .into());
    }
    let area = config.geometry.area();
    let r = config.loads.heat_source + config.loads.linear_power / area;
    let mesh = Mesh1D::uniform(config.geometry.length, config.n_elem, area)?;
    let base = solve_static(
        &mesh,
        &config.material,
        &config.bcs,
        &config.loads,
        config.solver.tol,
        config.solver.max_iter,
    )?;
    let xs = mesh.node_coords().to_vec();
    let oracle = analytic::conduction_ode_shooting(
        config.material.baseline.k0,
        config.material.laws.beta,
        t0,
        r,
        config.geometry.length,
        &xs,
        config.n_elem * 200,
    );
    let rows: Vec<(f64, f64, f64)> = xs
        .iter()
        .zip(base.t1.iter())
        .zip(oracle.iter())
        .map(|((&x, &tf), &to)| (x, tf, to))
        .collect();
    let scale = rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let max_rel_error = rows.iter().map(|r| (r.1 - r.2).abs()).fold(0.0, f64::max) / scale;
    Ok(ThermalValidation { rows, max_rel_error })
}

pub fn write_thermal_csv<W: Write>(mut w: W, v: &ThermalValidation) -> std::io::Result<()> {
    writeln!(w, "x_m,T_fe_K,T_oracle_K")?;
    for (x, tf, to) in &v.rows {
        writeln!(w, "{},{},{}", fmt_f64(*x), fmt_f64(*tf), fmt_f64(*to))?;
    }
    Ok(())
}
