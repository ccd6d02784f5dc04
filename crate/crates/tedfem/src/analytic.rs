//! Independent reference solutions used by the validation commands and the
//! test suite. Nothing here touches the finite element path.

use crate::material::MaterialBaseline;

/// End force per unit area of a homogeneously stretched Total-Lagrangian bar,
/// `F/A = Y0 (u' + u'^2/2)(1 + u')` with `u' = dL/L`.
pub fn bar_force_per_area(y0: f64, stretch: f64) -> f64 {
    y0 * (stretch + stretch * stretch / 2.0) * (1.0 + stretch)
}

/// Fundamental angular frequency of an undamped uniform bar [rad/s].
pub fn bar_frequency_fixed_free(y0: f64, rho0: f64, length: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 / length * (y0 / rho0).sqrt()
}

pub fn bar_frequency_fixed_fixed(y0: f64, rho0: f64, length: f64) -> f64 {
    std::f64::consts::PI / length * (y0 / rho0).sqrt()
}

/// Zener relaxation-strength scale of the inverse quality factor peak,
/// `Y0 alpha0^2 T0 / (2 rho0 cv0)`.
pub fn zener_peak_q_inverse(b: &MaterialBaseline) -> f64 {
    b.y0 * b.alpha0 * b.alpha0 * b.t0 / (2.0 * b.rho0 * b.cv0)
}

/// Closed-form steady temperature for conduction with `k = k0 exp(beta (T-T0))`
/// and uniform volumetric source `r`, isothermal ends at `T0`:
/// `T = T0 + ln(1 + beta r x (L - x) / (2 k0)) / beta`.
///
/// Obtained from the Kirchhoff transform of `(k(T) T')' = -r`. Heating (r > 0)
/// raises the interior temperature.
pub fn exp_conductivity_profile(k0: f64, beta: f64, t0: f64, r: f64, length: f64, x: f64) -> f64 {
    let arg = 1.0 + beta * r * x * (length - x) / (2.0 * k0);
    t0 + arg.ln() / beta
}

/// Linear-conduction (beta -> 0) limit: parabolic profile
/// `T = T0 + r x (L - x) / (2 k0)`.
pub fn parabolic_profile(k0: f64, t0: f64, r: f64, length: f64, x: f64) -> f64 {
    t0 + r * x * (length - x) / (2.0 * k0)
}

/// Steady profile of `(k(T) T')' = -r` with `k = k0 exp(beta (T - T0))` and
/// `T(0) = T(L) = T0`, by shooting on the initial gradient with RK4 and
/// bisection. Returns temperatures at the requested coordinates.
pub fn conduction_ode_shooting(
    k0: f64,
    beta: f64,
    t0: f64,
    r: f64,
    length: f64,
    xs: &[f64],
    n_rk_steps: usize,
) -> Vec<f64> {
    // State y = (T, g) with T' = g, g' = (-r - k'(T) g^2) / k(T).
    let deriv = |t: f64, g: f64| -> (f64, f64) {
        let k = k0 * (beta * (t - t0)).exp();
        (g, (-r - beta * k * g * g) / k)
    };
    let end_temp = |g0: f64| -> f64 {
        let hstep = length / n_rk_steps as f64;
        let (mut t, mut g) = (t0, g0);
        for _ in 0..n_rk_steps {
            let (k1t, k1g) = deriv(t, g);
            let (k2t, k2g) = deriv(t + 0.5 * hstep * k1t, g + 0.5 * hstep * k1g);
            let (k3t, k3g) = deriv(t + 0.5 * hstep * k2t, g + 0.5 * hstep * k2g);
            let (k4t, k4g) = deriv(t + hstep * k3t, g + hstep * k3g);
            t += hstep / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
            g += hstep / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        }
        t - t0
    };

    // Bracket the initial gradient around the linear-conduction estimate.
    let g_lin = r * length / (2.0 * k0);
    let (mut lo, mut hi) = (0.0, g_lin.max(1e-300));
    if r != 0.0 {
        while end_temp(hi) < 0.0 {
            hi *= 2.0;
        }
        // end_temp is increasing in g0: more initial gradient, hotter end.
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if end_temp(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * hi.abs().max(1e-300) {
                break;
            }
        }
    }
    let g0 = if r == 0.0 { 0.0 } else { 0.5 * (lo + hi) };

    // Re-integrate, sampling at the requested points (assumed sorted).
    let hstep = length / n_rk_steps as f64;
    let (mut t, mut g) = (t0, g0);
    let mut out = Vec::with_capacity(xs.len());
    let mut xi = 0usize;
    for step in 0..=n_rk_steps {
        let x = step as f64 * hstep;
        while xi < xs.len() && xs[xi] <= x + 0.5 * hstep {
            // Nearest grid point; with n_rk_steps >> sample count and sample
            // points on the grid this is exact.
            out.push(t);
            xi += 1;
        }
        if step == n_rk_steps {
            break;
        }
        let (k1t, k1g) = deriv(t, g);
        let (k2t, k2g) = deriv(t + 0.5 * hstep * k1t, g + 0.5 * hstep * k1g);
        let (k3t, k3g) = deriv(t + 0.5 * hstep * k2t, g + 0.5 * hstep * k2g);
        let (k4t, k4g) = deriv(t + hstep * k3t, g + hstep * k3g);
        t += hstep / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        g += hstep / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
    }
    while out.len() < xs.len() {
        out.push(t);
    }
    out
}
