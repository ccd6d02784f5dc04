//! Complex eigenvalue analysis of the linearized coupled system and
//! thermoelastic-damping extraction.
//!
//! The assembled second-order blocks are recast as a first-order real operator
//! acting on the state `(u, u_dot, theta)`. Internally the state is
//! nondimensionalized (length, time, temperature scales carried by the
//! assembled system) so the raw SI magnitude spread at nanometre scale does
//! not break the dense eigensolver; eigenvalues are mapped back by the time
//! scale alone.

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

use crate::assembly::{AssembledSystem, Scales};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EigenError {
    #[error("mass or heat-capacity block is singular; cannot form the state-space operator")]
    SingularMass,
    #[error("QR iteration failed to converge on the state-space spectrum")]
    NoConvergenceQr,
    #[error("no oscillatory mechanical mode found; all modes are overdamped or thermal")]
    NoMechanicalMode,
}

/// First-order real operator `z_dot = A z` with `z = (u, u_dot, theta)` in
/// nondimensional variables.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceOperator {
    pub a: DMatrix<f64>,
    /// Retained displacement DOF count m.
    pub n_u: usize,
    /// Retained temperature DOF count n.
    pub n_t: usize,
    /// Physical seconds per nondimensional time unit.
    pub time_scale: f64,
}

/// Build the homogeneous state-space operator from the assembled blocks using
/// the system's own scales.
pub fn build_state_space(sys: &AssembledSystem) -> Result<StateSpaceOperator, EigenError> {
    build_state_space_scaled(sys, sys.scales)
}

/// As [`build_state_space`] with explicit scales; `Scales::identity()` gives
/// the raw SI operator.
pub fn build_state_space_scaled(
    sys: &AssembledSystem,
    scales: Scales,
) -> Result<StateSpaceOperator, EigenError> {
    let m = sys.u_dofs.len();
    let n = sys.t_dofs.len();
    let ts = scales.time;
    let lu_m = sys.muu.clone().lu();
    let b_kuu = lu_m.solve(&sys.kuu).ok_or(EigenError::SingularMass)? * (ts * ts);
    let b_kut = lu_m.solve(&sys.kut).ok_or(EigenError::SingularMass)?
        * (ts * ts * scales.temperature / scales.length);
    let (b_dtu, b_ktt) = if n > 0 {
        let lu_d = sys.dtt.clone().lu();
        let dtu = lu_d.solve(&sys.dtu).ok_or(EigenError::SingularMass)?
            * (scales.length / scales.temperature);
        let ktt = lu_d.solve(&sys.ktt).ok_or(EigenError::SingularMass)? * ts;
        (dtu, ktt)
    } else {
        (DMatrix::zeros(0, m), DMatrix::zeros(0, 0))
    };

    let dim = 2 * m + n;
    let mut a = DMatrix::zeros(dim, dim);
    for i in 0..m {
        a[(i, m + i)] = 1.0;
    }
    a.view_mut((m, 0), (m, m)).copy_from(&(-&b_kuu));
    a.view_mut((m, 2 * m), (m, n)).copy_from(&(-&b_kut));
    a.view_mut((2 * m, m), (n, m)).copy_from(&(-&b_dtu));
    a.view_mut((2 * m, 2 * m), (n, n)).copy_from(&(-&b_ktt));
    if a.iter().any(|v| !v.is_finite()) {
        return Err(EigenError::SingularMass);
    }
    Ok(StateSpaceOperator { a, n_u: m, n_t: n, time_scale: ts })
}

/// Full nondimensional spectrum of the operator via real Schur reduction, with
/// conjugate pairing enforced to machine symmetry.
pub fn spectrum(op: &StateSpaceOperator) -> Result<Vec<Complex<f64>>, EigenError> {
    let schur = nalgebra::linalg::Schur::try_new(op.a.clone(), 1e-14, 200 * op.a.nrows())
        .ok_or(EigenError::NoConvergenceQr)?;
    let mut eigs: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    // 2x2 Schur blocks already produce exact conjugates; symmetrize defensively
    // by pairing each positive-imaginary value with its nearest negative twin.
    let mut used = vec![false; eigs.len()];
    for i in 0..eigs.len() {
        if used[i] || eigs[i].im <= 0.0 {
            continue;
        }
        let target = eigs[i].conj();
        let mut best: Option<(usize, f64)> = None;
        for (j, e) in eigs.iter().enumerate() {
            if j == i || used[j] || e.im >= 0.0 {
                continue;
            }
            let d = (e - target).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, _)) = best {
            let mean = Complex::new((eigs[i].re + eigs[j].re) / 2.0, (eigs[i].im - eigs[j].im) / 2.0);
            eigs[i] = mean;
            eigs[j] = mean.conj();
            used[i] = true;
            used[j] = true;
        }
    }
    Ok(eigs)
}

/// Outcome of the fundamental-mode search.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Physical eigenvalues [1/s].
    pub eigenvalues: Vec<Complex<f64>>,
    /// Selected fundamental mechanical eigenvalue sigma + i omega [1/s].
    pub fundamental: Complex<f64>,
    /// Angular frequency |Im lambda| [rad/s].
    pub omega: f64,
    /// Inverse quality factor 2 |Re| / |Im|.
    pub q_inverse: f64,
    /// Reference frequency for the shift [rad/s].
    pub omega0_ref: f64,
    /// Normalized frequency shift (omega - omega0) / omega0.
    pub shift: f64,
}

/// Select the fundamental longitudinal mode and report damping.
///
/// The fundamental is the conjugate pair with the smallest nonzero |Im| whose
/// eigenvector carries at least half of its norm in the mechanical partition;
/// purely real thermal relaxation modes are excluded. The selected eigenvalue
/// is refined by inverse iteration and a Rayleigh quotient before the damping
/// ratio is formed.
pub fn extract_q(
    op: &StateSpaceOperator,
    eigs: &[Complex<f64>],
    omega0_ref: f64,
) -> Result<EigenResult, EigenError> {
    let radius = eigs.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let im_floor = 1e-8 * radius.max(f64::MIN_POSITIVE);
    let mut candidates: Vec<Complex<f64>> = eigs
        .iter()
        .copied()
        .filter(|e| e.im > im_floor)
        .collect();
    candidates.sort_by(|a, b| a.im.total_cmp(&b.im));

    for cand in candidates {
        let (refined, v) = refine(op, cand);
        if mechanical_fraction(op, &v) >= 0.5 {
            let lambda = refined / op.time_scale;
            let omega = lambda.im.abs();
            let q_inverse = 2.0 * lambda.re.abs() / omega;
            let shift = if omega0_ref > 0.0 { (omega - omega0_ref) / omega0_ref } else { 0.0 };
            return Ok(EigenResult {
                eigenvalues: eigs.iter().map(|e| e / op.time_scale).collect(),
                fundamental: lambda,
                omega,
                q_inverse,
                omega0_ref,
                shift,
            });
        }
    }
    Err(EigenError::NoMechanicalMode)
}

/// Convenience: spectrum + extraction in one call.
pub fn analyze(sys: &AssembledSystem, omega0_ref: f64) -> Result<EigenResult, EigenError> {
    let op = build_state_space(sys)?;
    let eigs = spectrum(&op)?;
    extract_q(&op, &eigs, omega0_ref)
}

/// Inverse iteration about `lambda` followed by a Rayleigh-quotient update.
/// Returns the refined eigenvalue and a unit eigenvector.
fn refine(op: &StateSpaceOperator, lambda: Complex<f64>) -> (Complex<f64>, DVector<Complex<f64>>) {
    let dim = op.a.nrows();
    let ac = op.a.map(|x| Complex::new(x, 0.0));
    // Detune the shift slightly so the factorization stays usable.
    let shift = lambda + Complex::new(1e-10 * (1.0 + lambda.norm()), 0.0);
    let mut shifted = ac.clone();
    for i in 0..dim {
        shifted[(i, i)] -= shift;
    }
    let lu = shifted.lu();
    let mut v = DVector::from_element(dim, Complex::new(1.0, 0.0));
    v /= Complex::new(v.norm(), 0.0);
    for _ in 0..3 {
        match lu.solve(&v) {
            Some(w) if w.iter().all(|x| x.re.is_finite() && x.im.is_finite()) && w.norm() > 0.0 => {
                v = &w / Complex::new(w.norm(), 0.0);
            }
            _ => return (lambda, v),
        }
    }
    let av = &ac * &v;
    let rq = v.dotc(&av) / v.dotc(&v);
    // Guard against the iteration latching onto a different mode.
    if (rq - lambda).norm() <= 1e-3 * (1.0 + lambda.norm()) {
        (rq, v)
    } else {
        (lambda, v)
    }
}

/// Fraction of the eigenvector norm carried by the (u, u_dot) partition.
fn mechanical_fraction(op: &StateSpaceOperator, v: &DVector<Complex<f64>>) -> f64 {
    let total: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let mech: f64 = v.iter().take(2 * op.n_u).map(|x| x.norm_sqr()).sum();
    mech / total
}
