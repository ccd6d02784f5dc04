//! Per-element matrices and vectors of the incremental 1-D formulation.
//!
//! Every quantity is evaluated about a known base configuration (nodal
//! displacement `u1`, nodal temperature `t1`, quadrature-point stress `s1`)
//! with material properties interpolated to quadrature points. The entropy-rate
//! term of the thermal load vector vanishes identically for steady base states
//! and is therefore a documented zero here.

use crate::material::{LocalState, Material, MaterialError};
use crate::mesh::{shape_derivs, shape_values, QuadRule};

/// Base-configuration state of a single 2-node element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementState {
    /// Nodal displacements u1 [m].
    pub u1: [f64; 2],
    /// Nodal absolute temperatures T1 [K].
    pub t1: [f64; 2],
    /// Second Piola-Kirchhoff stress at each quadrature point [Pa].
    pub s1_qp: Vec<f64>,
}

impl ElementState {
    /// Undeformed element at the reference temperature.
    pub fn reference(t0: f64, n_qp: usize) -> Self {
        Self { u1: [0.0; 2], t1: [t0; 2], s1_qp: vec![0.0; n_qp] }
    }

    /// Reference displacement gradient du1/dx0, constant over the element.
    pub fn du_dx(&self, h: f64) -> f64 {
        (self.u1[1] - self.u1[0]) / h
    }
}

/// Distributed loads entering the element vectors.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ElementLoads {
    /// Volumetric heat source [W/m^3].
    pub heat_source: f64,
    /// Body force per unit mass [N/kg].
    pub body_force: f64,
}

/// The six 2x2 blocks and two load vectors of one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrices {
    pub muu: [[f64; 2]; 2],
    pub kuu: [[f64; 2]; 2],
    pub kut: [[f64; 2]; 2],
    pub dtt: [[f64; 2]; 2],
    pub dtu: [[f64; 2]; 2],
    pub ktt: [[f64; 2]; 2],
    pub fu: [f64; 2],
    pub ht: [f64; 2],
}

/// Compute all element blocks by Gauss quadrature about the given base state.
///
/// `fu` carries the body-force and internal-force integrals, `ht` the heat
/// source and base-flux integrals; boundary traction and flux are applied at
/// assembly as nodal endpoint values.
pub fn element_matrices(
    h: f64,
    area: f64,
    state: &ElementState,
    material: &Material,
    loads: &ElementLoads,
    quad: &QuadRule,
) -> Result<ElementMatrices, MaterialError> {
    debug_assert_eq!(state.s1_qp.len(), quad.len());
    let mut m = ElementMatrices {
        muu: [[0.0; 2]; 2],
        kuu: [[0.0; 2]; 2],
        kut: [[0.0; 2]; 2],
        dtt: [[0.0; 2]; 2],
        dtu: [[0.0; 2]; 2],
        ktt: [[0.0; 2]; 2],
        fu: [0.0; 2],
        ht: [0.0; 2],
    };
    let rho0 = material.baseline.rho0;
    let cv0 = material.baseline.cv0;
    let alpha0 = material.baseline.alpha0;
    let du1 = state.du_dx(h);
    let dt1 = (state.t1[1] - state.t1[0]) / h;
    let dn = shape_derivs(h);

    for (qi, (xi, w)) in quad.iter().enumerate() {
        let n = shape_values(xi);
        let t1 = n[0] * state.t1[0] + n[1] * state.t1[1];
        let local = LocalState { t1, du_dx: du1 };
        let young = material.young_modulus(&local);
        let k = material.conductivity(&local)?;
        let s1 = state.s1_qp[qi];
        let stretch = 1.0 + du1;
        // dV = A (h/2) dxi
        let dv = area * h / 2.0 * w;
        // base heat flux q1 = -k dT1/dx
        let q1 = -k * dt1;

        for i in 0..2 {
            for j in 0..2 {
                m.muu[i][j] += rho0 * n[i] * n[j] * dv;
                m.kuu[i][j] += (s1 + young * stretch * stretch) * dn[i] * dn[j] * dv;
                m.kut[i][j] += -alpha0 * young * stretch * dn[i] * n[j] * dv;
                m.dtt[i][j] += rho0 * cv0 * n[i] * n[j] * dv;
                m.dtu[i][j] += alpha0 * t1 * young * stretch * n[i] * dn[j] * dv;
                m.ktt[i][j] += k * dn[i] * dn[j] * dv;
            }
            m.fu[i] += rho0 * loads.body_force * n[i] * dv - s1 * stretch * dn[i] * dv;
            m.ht[i] += loads.heat_source * n[i] * dv + q1 * dn[i] * dv;
        }
    }
    Ok(m)
}

/// Conductivity-derivative contribution to the thermal Newton tangent,
/// `int (dk/dT) T1' phi_j phi_i' dV`. Not part of the linearized eigensystem.
pub fn thermal_tangent_correction(
    h: f64,
    area: f64,
    state: &ElementState,
    material: &Material,
    quad: &QuadRule,
) -> Result<[[f64; 2]; 2], MaterialError> {
    let mut c = [[0.0; 2]; 2];
    let du1 = state.du_dx(h);
    let dt1 = (state.t1[1] - state.t1[0]) / h;
    let dn = shape_derivs(h);
    for (xi, w) in quad.iter() {
        let n = shape_values(xi);
        let t1 = n[0] * state.t1[0] + n[1] * state.t1[1];
        let dk_dt = material.conductivity_dtemp(&LocalState { t1, du_dx: du1 })?;
        let dv = area * h / 2.0 * w;
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] += dk_dt * dt1 * n[j] * dn[i] * dv;
            }
        }
    }
    Ok(c)
}

/// Linear (`e`) and nonlinear (`gamma`) parts of the incremental strain for a
/// nodal displacement increment, with the base gradient frozen:
/// `e = u' + u1' u'`, `gamma = (u')^2 / 2`. Constant over a linear element.
pub fn incremental_strain_measures(u_inc: [f64; 2], base_du_dx: f64, h: f64) -> (f64, f64) {
    let du = (u_inc[1] - u_inc[0]) / h;
    let e = du + base_du_dx * du;
    let gamma = 0.5 * du * du;
    (e, gamma)
}

/// Incremental stress update `S2 = S1 + Y (e + gamma) - Y alpha0 theta`. The
/// full strain increment is retained even though the tangent uses `e` only.
pub fn stress_update(s1: f64, e: f64, gamma: f64, theta: f64, material: &Material, local: &LocalState) -> f64 {
    let young = material.young_modulus(local);
    s1 + young * (e + gamma) - young * material.baseline.alpha0 * theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{MaterialBaseline, MaterialLaws};
    use approx::assert_relative_eq;

    fn silicon() -> Material {
        Material::new(MaterialBaseline::silicon(), MaterialLaws::default())
    }

    fn reference_matrices(h: f64, area: f64, quad: &QuadRule) -> ElementMatrices {
        let mat = silicon();
        let state = ElementState::reference(mat.baseline.t0, quad.len());
        element_matrices(h, area, &state, &mat, &ElementLoads::default(), quad).unwrap()
    }

    fn assert_block_eq(got: &[[f64; 2]; 2], want: &[[f64; 2]; 2], tol: f64) {
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(got[i][j], want[i][j], max_relative = tol, epsilon = 1e-300);
            }
        }
    }

    #[test]
    fn reference_state_blocks_match_exact_integrals() {
        let (h, a) = (25e-9, 1e-16);
        let b = MaterialBaseline::silicon();
        let m = reference_matrices(h, a, &QuadRule::default_rule());

        let mm = b.rho0 * a * h / 6.0;
        assert_block_eq(&m.muu, &[[2.0 * mm, mm], [mm, 2.0 * mm]], 1e-13);

        let kk = b.y0 * a / h;
        assert_block_eq(&m.kuu, &[[kk, -kk], [-kk, kk]], 1e-13);

        let kt = b.alpha0 * b.y0 * a / 2.0;
        assert_block_eq(&m.kut, &[[kt, kt], [-kt, -kt]], 1e-13);

        let tt = b.k0 * a / h;
        assert_block_eq(&m.ktt, &[[tt, -tt], [-tt, tt]], 1e-13);

        let dd = b.rho0 * b.cv0 * a * h / 6.0;
        assert_block_eq(&m.dtt, &[[2.0 * dd, dd], [dd, 2.0 * dd]], 1e-13);

        let du = b.alpha0 * b.t0 * b.y0 * a / 2.0;
        assert_block_eq(&m.dtu, &[[-du, du], [-du, du]], 1e-13);

        assert_eq!(m.fu, [0.0, 0.0]);
        assert_eq!(m.ht, [0.0, 0.0]);
    }

    #[test]
    fn coupling_reciprocity_at_reference_state() {
        // Kut_ij = -(Dtu_ji) / T0 at u1 = 0, T1 = T0, linear material.
        let m = reference_matrices(1e-8, 1e-16, &QuadRule::default_rule());
        let t0 = 300.0;
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(m.kut[i][j], -m.dtu[j][i] / t0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn blocks_scale_linearly_with_area() {
        let q = QuadRule::default_rule();
        let mat = silicon();
        let mut state = ElementState::reference(300.0, q.len());
        state.u1 = [0.0, 2e-9];
        state.t1 = [305.0, 312.0];
        state.s1_qp = vec![1e7; q.len()];
        let loads = ElementLoads { heat_source: 1e17, body_force: 3.0 };
        let m1 = element_matrices(1e-8, 1e-16, &state, &mat, &loads, &q).unwrap();
        let m2 = element_matrices(1e-8, 3e-16, &state, &mat, &loads, &q).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(m2.muu[i][j], 3.0 * m1.muu[i][j], max_relative = 1e-12);
                assert_relative_eq!(m2.kuu[i][j], 3.0 * m1.kuu[i][j], max_relative = 1e-12);
                assert_relative_eq!(m2.kut[i][j], 3.0 * m1.kut[i][j], max_relative = 1e-12);
                assert_relative_eq!(m2.dtt[i][j], 3.0 * m1.dtt[i][j], max_relative = 1e-12);
                assert_relative_eq!(m2.dtu[i][j], 3.0 * m1.dtu[i][j], max_relative = 1e-12);
                assert_relative_eq!(m2.ktt[i][j], 3.0 * m1.ktt[i][j], max_relative = 1e-12);
            }
            assert_relative_eq!(m2.fu[i], 3.0 * m1.fu[i], max_relative = 1e-12);
            assert_relative_eq!(m2.ht[i], 3.0 * m1.ht[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn kuu_symmetric_and_stiffened_by_pretension() {
        let q = QuadRule::default_rule();
        let mat = silicon();
        let h = 1e-8;
        let mut state = ElementState::reference(300.0, q.len());
        state.u1 = [1e-9, 3e-9];
        state.t1 = [310.0, 304.0];
        let m0 = element_matrices(h, 1e-16, &state, &mat, &ElementLoads::default(), &q).unwrap();
        assert_relative_eq!(m0.kuu[0][1], m0.kuu[1][0], max_relative = 1e-14);

        state.s1_qp = vec![5e8; q.len()];
        let m1 = element_matrices(h, 1e-16, &state, &mat, &ElementLoads::default(), &q).unwrap();
        // After fixing one node the element reduces to the scalar kuu[1][1].
        assert!(m1.kuu[1][1] > m0.kuu[1][1]);
    }

    #[test]
    fn three_point_quadrature_suffices() {
        let q3 = QuadRule::gauss(3);
        let q10 = QuadRule::gauss(10);
        let mat = silicon();
        let h = 1e-8;
        let build = |q: &QuadRule| {
            let mut state = ElementState::reference(300.0, q.len());
            state.u1 = [0.0, 1.5e-9];
            state.t1 = [302.0, 309.0];
            state.s1_qp = vec![2e8; q.len()];
            element_matrices(h, 1e-16, &state, &mat, &ElementLoads { heat_source: 1e16, body_force: 1.0 }, q)
                .unwrap()
        };
        let (a, b) = (build(&q3), build(&q10));
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(a.kuu[i][j], b.kuu[i][j], max_relative = 1e-10);
                assert_relative_eq!(a.kut[i][j], b.kut[i][j], max_relative = 1e-10);
                assert_relative_eq!(a.dtu[i][j], b.dtu[i][j], max_relative = 1e-10);
                assert_relative_eq!(a.ktt[i][j], b.ktt[i][j], max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn incremental_strains_match_closed_forms() {
        assert_eq!(incremental_strain_measures([0.0, 0.0], 0.5, 1.0), (0.0, 0.0));
        let (e, g) = incremental_strain_measures([0.0, 0.1], 0.0, 1.0);
        assert_relative_eq!(e, 0.1, max_relative = 1e-15);
        assert_relative_eq!(g, 0.005, max_relative = 1e-15);
        let (e, g) = incremental_strain_measures([0.0, 0.1], 0.2, 1.0);
        assert_relative_eq!(e, 0.12, max_relative = 1e-15);
        assert_relative_eq!(g, 0.005, max_relative = 1e-15);
    }

    #[test]
    fn stress_update_cases() {
        let mat = silicon();
        let local = LocalState { t1: 300.0, du_dx: 0.0 };
        assert_eq!(stress_update(0.0, 0.0, 0.0, 0.0, &mat, &local), 0.0);
        assert_relative_eq!(
            stress_update(0.0, 1e-3, 0.0, 0.0, &mat, &local),
            1.65e8,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            stress_update(0.0, 0.0, 0.0, 1.0, &mat, &local),
            -4.29e5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn conductivity_error_propagates() {
        let q = QuadRule::default_rule();
        let mat = Material::new(
            MaterialBaseline::silicon(),
            MaterialLaws { chi: 5.0, ..Default::default() },
        );
        let mut state = ElementState::reference(300.0, q.len());
        state.u1 = [0.0, 0.5e-8]; // du/dx = 0.5 -> 1 - chi u' < 0
        let r = element_matrices(1e-8, 1e-16, &state, &mat, &ElementLoads::default(), &q);
        assert!(matches!(r, Err(MaterialError::NonPositiveConductivity { .. })));
    }
}
