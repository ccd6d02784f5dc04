//! Global assembly: scatter of element blocks, boundary conditions and the
//! reduced second-order block system.
//!
//! DOF layout is all displacement DOFs first, then all temperature DOFs.
//! Dirichlet conditions (fixed ends, isothermal ends) are enforced by row and
//! column elimination; Neumann data (end traction, end flux) is added to the
//! endpoint entries of the load vectors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::element::{element_matrices, ElementLoads};
use crate::material::{Material, MaterialError};
use crate::mesh::{Mesh1D, QuadRule};
use crate::static_solver::BaseState;

/// Mechanical boundary condition at one end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechBc {
    Fixed,
    /// Applied axial traction [Pa], positive along +x at that node.
    Free { traction: f64 },
}

/// Thermal boundary condition at one end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermBc {
    /// Prescribed absolute temperature [K].
    Isothermal { temperature: f64 },
    Adiabatic,
    /// Prescribed inward heat flux [W/m^2].
    Flux { flux: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundaryConditions {
    pub mech_left: MechBc,
    pub mech_right: MechBc,
    pub therm_left: ThermBc,
    pub therm_right: ThermBc,
}

impl Default for BoundaryConditions {
    fn default() -> Self {
        Self::fixed_fixed_isothermal(300.0)
    }
}

impl BoundaryConditions {
    /// Fixed-fixed bar with both ends held at temperature `t`.
    pub fn fixed_fixed_isothermal(t: f64) -> Self {
        Self {
            mech_left: MechBc::Fixed,
            mech_right: MechBc::Fixed,
            therm_left: ThermBc::Isothermal { temperature: t },
            therm_right: ThermBc::Isothermal { temperature: t },
        }
    }

    pub fn validate(&self) -> Result<(), AssemblyError> {
        if self.mech_left != MechBc::Fixed && self.mech_right != MechBc::Fixed {
            return Err(AssemblyError::NoMechanicalDirichlet);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AssemblyError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("all mechanical DOFs eliminated; the reduced system is empty")]
    SingularSystem,
    #[error("at least one mechanical end must be fixed")]
    NoMechanicalDirichlet,
}

/// Characteristic scales used to nondimensionalize the eigenproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    /// Length scale [m].
    pub length: f64,
    /// Time scale [s], length / longitudinal wave speed.
    pub time: f64,
    /// Temperature scale [K].
    pub temperature: f64,
}

impl Scales {
    pub fn from_problem(mesh: &Mesh1D, material: &Material) -> Self {
        let c = (material.baseline.y0 / material.baseline.rho0).sqrt();
        Self {
            length: mesh.length(),
            time: mesh.length() / c,
            temperature: material.baseline.t0,
        }
    }

    /// No scaling; raw SI blocks.
    pub fn identity() -> Self {
        Self { length: 1.0, time: 1.0, temperature: 1.0 }
    }
}

/// Unreduced global blocks over all nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalBlocks {
    pub muu: DMatrix<f64>,
    pub kuu: DMatrix<f64>,
    pub kut: DMatrix<f64>,
    pub dtt: DMatrix<f64>,
    pub dtu: DMatrix<f64>,
    pub ktt: DMatrix<f64>,
    pub fu: DVector<f64>,
    pub ht: DVector<f64>,
}

/// Reduced global system after Dirichlet elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledSystem {
    pub muu: DMatrix<f64>,
    pub kuu: DMatrix<f64>,
    pub kut: DMatrix<f64>,
    pub dtt: DMatrix<f64>,
    pub dtu: DMatrix<f64>,
    pub ktt: DMatrix<f64>,
    pub fu: DVector<f64>,
    pub ht: DVector<f64>,
    /// Node indices of retained displacement DOFs.
    pub u_dofs: Vec<usize>,
    /// Node indices of retained temperature DOFs.
    pub t_dofs: Vec<usize>,
    pub scales: Scales,
}

/// Scatter element blocks into unreduced global blocks. Boundary terms are
/// not applied here.
pub fn assemble_full(
    mesh: &Mesh1D,
    base: &BaseState,
    material: &Material,
    loads: &ElementLoads,
    quad: &QuadRule,
) -> Result<GlobalBlocks, AssemblyError> {
    let n = mesh.n_nodes();
    let mut g = GlobalBlocks {
        muu: DMatrix::zeros(n, n),
        kuu: DMatrix::zeros(n, n),
        kut: DMatrix::zeros(n, n),
        dtt: DMatrix::zeros(n, n),
        dtu: DMatrix::zeros(n, n),
        ktt: DMatrix::zeros(n, n),
        fu: DVector::zeros(n),
        ht: DVector::zeros(n),
    };
    for e in 0..mesh.n_elem() {
        let state = base.element_state(e);
        let em = element_matrices(mesh.elem_length(e), mesh.area(), &state, material, loads, quad)?;
        scatter(&mut g, e, &em);
    }
    Ok(g)
}

fn scatter(g: &mut GlobalBlocks, e: usize, em: &crate::element::ElementMatrices) {
    for i in 0..2 {
        for j in 0..2 {
            g.muu[(e + i, e + j)] += em.muu[i][j];
            g.kuu[(e + i, e + j)] += em.kuu[i][j];
            g.kut[(e + i, e + j)] += em.kut[i][j];
            g.dtt[(e + i, e + j)] += em.dtt[i][j];
            g.dtu[(e + i, e + j)] += em.dtu[i][j];
            g.ktt[(e + i, e + j)] += em.ktt[i][j];
        }
        g.fu[e + i] += em.fu[i];
        g.ht[e + i] += em.ht[i];
    }
}

/// Add end traction and end flux to the load vectors.
pub fn apply_neumann(g: &mut GlobalBlocks, bcs: &BoundaryConditions, area: f64) {
    let last = g.fu.len() - 1;
    if let MechBc::Free { traction } = bcs.mech_left {
        g.fu[0] += area * traction;
    }
    if let MechBc::Free { traction } = bcs.mech_right {
        g.fu[last] += area * traction;
    }
    if let ThermBc::Flux { flux } = bcs.therm_left {
        g.ht[0] += area * flux;
    }
    if let ThermBc::Flux { flux } = bcs.therm_right {
        g.ht[last] += area * flux;
    }
}

/// Node indices retained after mechanical / thermal Dirichlet elimination.
pub fn retained_dofs(bcs: &BoundaryConditions, n_nodes: usize) -> (Vec<usize>, Vec<usize>) {
    let last = n_nodes - 1;
    let u_dofs = (0..n_nodes)
        .filter(|&i| {
            !(i == 0 && bcs.mech_left == MechBc::Fixed || i == last && bcs.mech_right == MechBc::Fixed)
        })
        .collect();
    let t_dofs = (0..n_nodes)
        .filter(|&i| {
            !(i == 0 && matches!(bcs.therm_left, ThermBc::Isothermal { .. })
                || i == last && matches!(bcs.therm_right, ThermBc::Isothermal { .. }))
        })
        .collect();
    (u_dofs, t_dofs)
}

/// Prescribed nodal values implied by the Dirichlet conditions: displacement
/// (fixed ends) and absolute temperature (isothermal ends).
pub fn dirichlet_lift(
    bcs: &BoundaryConditions,
    mesh: &Mesh1D,
) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    let n = mesh.n_nodes();
    let mut u = vec![None; n];
    let mut t = vec![None; n];
    if bcs.mech_left == MechBc::Fixed {
        u[0] = Some(0.0);
    }
    if bcs.mech_right == MechBc::Fixed {
        u[n - 1] = Some(0.0);
    }
    if let ThermBc::Isothermal { temperature } = bcs.therm_left {
        t[0] = Some(temperature);
    }
    if let ThermBc::Isothermal { temperature } = bcs.therm_right {
        t[n - 1] = Some(temperature);
    }
    (u, t)
}

fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn select_vec(v: &DVector<f64>, rows: &[usize]) -> DVector<f64> {
    DVector::from_fn(rows.len(), |i, _| v[rows[i]])
}

/// Reduce unreduced blocks to the retained DOFs.
pub fn reduce(
    g: &GlobalBlocks,
    bcs: &BoundaryConditions,
    scales: Scales,
) -> Result<AssembledSystem, AssemblyError> {
    let n = g.fu.len();
    let (u_dofs, t_dofs) = retained_dofs(bcs, n);
    if u_dofs.is_empty() {
        return Err(AssemblyError::SingularSystem);
    }
    Ok(AssembledSystem {
        muu: select(&g.muu, &u_dofs, &u_dofs),
        kuu: select(&g.kuu, &u_dofs, &u_dofs),
        kut: select(&g.kut, &u_dofs, &t_dofs),
        dtt: select(&g.dtt, &t_dofs, &t_dofs),
        dtu: select(&g.dtu, &t_dofs, &u_dofs),
        ktt: select(&g.ktt, &t_dofs, &t_dofs),
        fu: select_vec(&g.fu, &u_dofs),
        ht: select_vec(&g.ht, &t_dofs),
        u_dofs,
        t_dofs,
        scales,
    })
}

/// Assemble the reduced global system about a base state: scatter, Neumann
/// terms, Dirichlet elimination.
pub fn assemble(
    mesh: &Mesh1D,
    base: &BaseState,
    material: &Material,
    bcs: &BoundaryConditions,
    loads: &ElementLoads,
) -> Result<AssembledSystem, AssemblyError> {
    bcs.validate()?;
    let quad = QuadRule::default_rule();
    let mut g = assemble_full(mesh, base, material, loads, &quad)?;
    apply_neumann(&mut g, bcs, mesh.area());
    reduce(&g, bcs, Scales::from_problem(mesh, material))
}
