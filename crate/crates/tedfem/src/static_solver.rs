//! Nonlinear static base-state construction by incremental load stepping with
//! Newton iteration.
//!
//! The base configuration is built by ramping pre-strain, end traction and
//! internal heating over `n_steps` increments. Within each step the steady
//! energy equation (all time derivatives dropped) is solved for the
//! temperature increment, then the momentum balance for the displacement
//! increment, with quadrature-point stresses updated incrementally.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::assembly::{
    apply_neumann, assemble_full, dirichlet_lift, AssemblyError, BoundaryConditions, GlobalBlocks,
    MechBc,
};
use crate::element::{
    incremental_strain_measures, stress_update, thermal_tangent_correction, ElementLoads,
    ElementState,
};
use crate::material::{LocalState, Material};
use crate::mesh::{shape_values, Mesh1D, QuadRule};

/// Converged base configuration about which the eigenproblem is linearized.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseState {
    /// Nodal displacements [m].
    pub u1: DVector<f64>,
    /// Nodal absolute temperatures [K].
    pub t1: DVector<f64>,
    /// Second Piola-Kirchhoff stress per element per quadrature point [Pa].
    pub s1_qp: Vec<Vec<f64>>,
    pub converged: bool,
    /// Scaled residual norm at the end of each Newton iteration.
    pub residual_norms: Vec<f64>,
    /// Nodal reaction forces [N]; meaningful at displacement-Dirichlet nodes.
    pub reactions: DVector<f64>,
}

impl BaseState {
    /// Undeformed, stress-free state at the reference temperature.
    pub fn reference(mesh: &Mesh1D, material: &Material) -> Self {
        let n = mesh.n_nodes();
        let n_qp = QuadRule::default_rule().len();
        Self {
            u1: DVector::zeros(n),
            t1: DVector::from_element(n, material.baseline.t0),
            s1_qp: vec![vec![0.0; n_qp]; mesh.n_elem()],
            converged: true,
            residual_norms: Vec::new(),
            reactions: DVector::zeros(n),
        }
    }

    pub fn element_state(&self, e: usize) -> ElementState {
        ElementState {
            u1: [self.u1[e], self.u1[e + 1]],
            t1: [self.t1[e], self.t1[e + 1]],
            s1_qp: self.s1_qp[e].clone(),
        }
    }
}

/// Ramped load targets for the static solve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct LoadProgram {
    pub n_steps: usize,
    /// Final pre-strain dL/L imposed as a ramped end displacement [-].
    pub prestrain: f64,
    /// Final end traction at the non-fixed end [Pa].
    pub traction: f64,
    /// Final volumetric heat source [W/m^3].
    pub heat_source: f64,
    /// Final heating per unit length [W/m]; divided by the cross-section area.
    pub linear_power: f64,
}

impl Default for LoadProgram {
    fn default() -> Self {
        Self { n_steps: 10, prestrain: 0.0, traction: 0.0, heat_source: 0.0, linear_power: 0.0 }
    }
}

impl LoadProgram {
    pub fn is_unloaded(&self) -> bool {
        self.prestrain == 0.0 && self.traction == 0.0 && self.heat_source == 0.0 && self.linear_power == 0.0
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("Newton iteration did not converge at step {step}, iteration {iter}: scaled residual {residual:.3e}; try more load steps")]
    NoConvergence { step: usize, iter: usize, residual: f64 },
    #[error("singular tangent in static solve; the configuration has lost stability or the thermal problem is ill-posed")]
    SingularTangent,
    #[error("load program must ramp at least over one step")]
    InvalidProgram,
}

/// Default convergence tolerance on the combined scaled residual.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default Newton iteration cap per load step.
pub const DEFAULT_MAX_ITER: usize = 25;

struct DirichletSets {
    /// (node, final prescribed displacement) pairs.
    u: Vec<(usize, f64)>,
    /// (node, final prescribed absolute temperature) pairs.
    t: Vec<(usize, f64)>,
    u_free: Vec<usize>,
    t_free: Vec<usize>,
}

fn dirichlet_sets(
    mesh: &Mesh1D,
    bcs: &BoundaryConditions,
    program: &LoadProgram,
) -> Result<DirichletSets, SolverError> {
    let n = mesh.n_nodes();
    let last = n - 1;
    let (u_lift, t_lift) = dirichlet_lift(bcs, mesh);
    let mut u: Vec<(usize, f64)> = Vec::new();
    let mut t: Vec<(usize, f64)> = Vec::new();
    for (i, v) in u_lift.iter().enumerate() {
        if let Some(v) = v {
            u.push((i, *v));
        }
    }
    if program.prestrain != 0.0 {
        // Pre-strain is a ramped end displacement at the right end; the left
        // end must anchor the bar.
        if bcs.mech_left != MechBc::Fixed {
            return Err(AssemblyError::NoMechanicalDirichlet.into());
        }
        let target = program.prestrain * mesh.length();
        if let Some(entry) = u.iter_mut().find(|(i, _)| *i == last) {
            entry.1 = target;
        } else {
            u.push((last, target));
        }
    }
    for (i, v) in t_lift.iter().enumerate() {
        if let Some(v) = v {
            t.push((i, *v));
        }
    }
    let u_nodes: Vec<usize> = u.iter().map(|&(i, _)| i).collect();
    let t_nodes: Vec<usize> = t.iter().map(|&(i, _)| i).collect();
    let u_free = (0..n).filter(|i| !u_nodes.contains(i)).collect();
    let t_free = (0..n).filter(|i| !t_nodes.contains(i)).collect();
    Ok(DirichletSets { u, t, u_free, t_free })
}

fn rows(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_fn(idx.len(), |i, _| v[idx[i]])
}

fn submatrix(m: &DMatrix<f64>, r: &[usize], c: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(r.len(), c.len(), |i, j| m[(r[i], c[j])])
}

/// Build the base configuration for the given load program.
pub fn solve_static(
    mesh: &Mesh1D,
    material: &Material,
    bcs: &BoundaryConditions,
    program: &LoadProgram,
    tol: f64,
    max_iter: usize,
) -> Result<BaseState, SolverError> {
    bcs.validate()?;
    if program.n_steps < 1 {
        return Err(SolverError::InvalidProgram);
    }
    let quad = QuadRule::default_rule();
    let n = mesh.n_nodes();
    let area = mesh.area();
    let dsets = dirichlet_sets(mesh, bcs, program)?;
    let mut state = BaseState::reference(mesh, material);
    state.converged = false;

    // Residual scales: characteristic force and heat rate.
    let force_scale = material.baseline.y0 * area;
    let heat_scale = material.baseline.k0 * area * material.baseline.t0 / mesh.length();

    let r_total = program.heat_source + program.linear_power / area;
    let traction_node = if bcs.mech_left == MechBc::Fixed { n - 1 } else { 0 };
    let apply_traction = program.traction != 0.0
        && matches!(
            if traction_node == 0 { bcs.mech_left } else { bcs.mech_right },
            MechBc::Free { .. }
        );

    let mut last_blocks: Option<GlobalBlocks> = None;
    for step in 1..=program.n_steps {
        let frac = step as f64 / program.n_steps as f64;
        let loads = ElementLoads { heat_source: r_total * frac, body_force: 0.0 };
        let mut converged = false;
        for iter in 0..=max_iter {
            let mut g = assemble_full(mesh, &state, material, &loads, &quad)?;
            apply_neumann(&mut g, bcs, area);
            if apply_traction {
                // The BC-level traction is constant; the programmed traction ramps.
                g.fu[traction_node] += area * program.traction * frac;
            }

            // Prescribed increments to reach this step's ramp fraction.
            let mut du_presc = DVector::zeros(n);
            for &(i, target) in &dsets.u {
                du_presc[i] = target * frac - state.u1[i];
            }
            let mut dt_presc = DVector::zeros(n);
            for &(i, target) in &dsets.t {
                let ramped =
                    material.baseline.t0 + (target - material.baseline.t0) * frac;
                dt_presc[i] = ramped - state.t1[i];
            }

            let res_u = rows(&g.fu, &dsets.u_free).norm() / force_scale;
            let res_t = rows(&g.ht, &dsets.t_free).norm() / heat_scale;
            let residual = res_u + res_t;
            state.residual_norms.push(residual);
            let presc_pending = du_presc.amax() > 1e-12 * mesh.length()
                || dt_presc.amax() > 1e-12 * material.baseline.t0;
            if residual <= tol && !presc_pending {
                last_blocks = Some(g);
                converged = true;
                break;
            }
            if iter == max_iter {
                return Err(SolverError::NoConvergence { step, iter, residual });
            }

            // Thermal solve: steady energy balance with consistent k(T) tangent.
            let mut ktt_tan = g.ktt.clone();
            for e in 0..mesh.n_elem() {
                let corr = thermal_tangent_correction(
                    mesh.elem_length(e),
                    area,
                    &state.element_state(e),
                    material,
                    &quad,
                )
                .map_err(AssemblyError::from)?;
                for i in 0..2 {
                    for j in 0..2 {
                        ktt_tan[(e + i, e + j)] += corr[i][j];
                    }
                }
            }
            let mut dtheta = dt_presc.clone();
            let rhs_t_full = &g.ht - &ktt_tan * &dt_presc;
            let rhs_t = rows(&rhs_t_full, &dsets.t_free);
            if !dsets.t_free.is_empty() && rhs_t.norm() > 0.0 {
                let ktt_red = submatrix(&ktt_tan, &dsets.t_free, &dsets.t_free);
                let sol = ktt_red.lu().solve(&rhs_t).ok_or(SolverError::SingularTangent)?;
                if sol.iter().any(|v| !v.is_finite()) {
                    return Err(SolverError::SingularTangent);
                }
                for (k, &i) in dsets.t_free.iter().enumerate() {
                    dtheta[i] = sol[k];
                }
            }

            // Mechanical solve with the temperature increment on the RHS.
            let mut du = du_presc.clone();
            let rhs_u_full = &g.fu - &g.kuu * &du_presc - &g.kut * &dtheta;
            let rhs_u = rows(&rhs_u_full, &dsets.u_free);
            if !dsets.u_free.is_empty() {
                let kuu_red = submatrix(&g.kuu, &dsets.u_free, &dsets.u_free);
                let sol = kuu_red.lu().solve(&rhs_u).ok_or(SolverError::SingularTangent)?;
                if sol.iter().any(|v| !v.is_finite()) {
                    return Err(SolverError::SingularTangent);
                }
                for (k, &i) in dsets.u_free.iter().enumerate() {
                    du[i] = sol[k];
                }
            }

            // Stress update at quadrature points with the base state frozen.
            for e in 0..mesh.n_elem() {
                let h = mesh.elem_length(e);
                let base_du = (state.u1[e + 1] - state.u1[e]) / h;
                let (inc_e, inc_g) =
                    incremental_strain_measures([du[e], du[e + 1]], base_du, h);
                for (qi, (xi, _)) in quad.iter().enumerate() {
                    let nsh = shape_values(xi);
                    let t1 = nsh[0] * state.t1[e] + nsh[1] * state.t1[e + 1];
                    let theta = nsh[0] * dtheta[e] + nsh[1] * dtheta[e + 1];
                    let local = LocalState { t1, du_dx: base_du };
                    state.s1_qp[e][qi] =
                        stress_update(state.s1_qp[e][qi], inc_e, inc_g, theta, material, &local);
                }
            }
            state.u1 += &du;
            state.t1 += &dtheta;
        }
        if !converged {
            unreachable!("newton loop exits by convergence or error");
        }
    }

    if let Some(g) = last_blocks {
        state.reactions = -g.fu;
    }
    state.converged = true;
    Ok(state)
}
