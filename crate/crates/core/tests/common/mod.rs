//! Fixtures and reference models shared by the integration tests.
//!
//! `bare_coherence` solves the first-order Liouville equation directly in the
//! bare six-state basis with nalgebra, without the dressed-frame
//! decomposition, so it checks the library's derivation rather than
//! repeating it.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, DVector, Matrix2, SymmetricEigen};
use tunnel_eit::{RawParams, SystemParams};

pub type C = Complex<f64>;

pub fn params(omega_ac: f64, g_b: f64, g_c: f64) -> SystemParams {
    RawParams {
        omega_ac: Some(omega_ac),
        gamma_a: Some(2.0),
        gamma_ab: Some(1.0),
        g_b: Some(g_b),
        g_c: Some(g_c),
        ..Default::default()
    }
    .validate()
    .unwrap()
}

/// Narrow-resonance set: `Omega_ac = gamma_a = 2`, `g_b = g_c = 2e-4`.
pub fn narrow() -> SystemParams {
    params(2.0, 2e-4, 2e-4)
}

/// Moderate tunneling, `g_b = g_c = 0.1`.
pub fn moderate() -> SystemParams {
    params(2.0, 0.1, 0.1)
}

pub fn rel_err(a: C, b: C) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Lower eigenvector of the {b, b'} block, with non-negative components.
fn lower_state(delta: f64, g: f64) -> [f64; 2] {
    if delta == 0.0 && g == 0.0 {
        return [1.0, 0.0];
    }
    let h = Matrix2::new(delta / 2.0, -g / 2.0, -g / 2.0, -delta / 2.0);
    let eig = SymmetricEigen::new(h);
    let k = if eig.eigenvalues[0] <= eig.eigenvalues[1] {
        0
    } else {
        1
    };
    let v = eig.eigenvectors.column(k);
    let s = if v[0] + v[1] < 0.0 { -1.0 } else { 1.0 };
    [s * v[0], s * v[1]]
}

/// First-order `rho_ab` from the Liouville equation over the bare states
/// (a, b, c, a', b', c').
///
/// Rotating-frame energies: `E_b = +-delta_bb/2` about zero,
/// `E_a = delta_p`, `E_c = delta_p - delta_mu +- delta_cc/2`; tunneling
/// elements `-g/2`; probe `<a|H|b> = -(Omega_ab/2) e^{-i phi_ab}`; control
/// `<a|H|c> = -(Omega_ac/2) e^{-i phi_ac}`; both lasers act only in the
/// unprimed well. Mean-field shifts enter through the shifted detunings.
pub fn bare_coherence(p: &SystemParams, delta_p: f64) -> C {
    let dp = delta_p - p.u_bb / 2.0 + p.u_ab;
    let dmu = p.delta_mu - p.u_cb / 2.0 + p.u_ab;
    let z = C::new(0.0, 0.0);
    let re = |x: f64| C::new(x, 0.0);

    // upper block over (a, c, a', c')
    let e_c = dp - dmu;
    let ctrl = -0.5 * p.omega_ac * C::from_polar(1.0, -p.phi_ac);
    let h_u = [
        [re(dp), ctrl, re(-p.g_a / 2.0), z],
        [ctrl.conj(), re(e_c + p.delta_cc / 2.0), z, re(-p.g_c / 2.0)],
        [re(-p.g_a / 2.0), z, re(dp), z],
        [z, re(-p.g_c / 2.0), z, re(e_c - p.delta_cc / 2.0)],
    ];
    let h_g = [
        [p.delta_bb / 2.0, -p.g_b / 2.0],
        [-p.g_b / 2.0, -p.delta_bb / 2.0],
    ];
    let decay = [p.gamma_ab, 0.0, p.gamma_ab, 0.0];

    let lower = lower_state(p.delta_bb, p.g_b);
    let upper = [-lower[1], lower[0]];
    let theta = lower[1].atan2(lower[0]);
    let (w_low, w_up) = (
        (theta - p.phi_prep).cos().powi(2),
        (theta - p.phi_prep).sin().powi(2),
    );
    let rho0 = |i: usize, j: usize| w_low * lower[i] * lower[j] + w_up * upper[i] * upper[j];
    let probe = -0.5 * p.omega_ab * C::from_polar(1.0, -p.phi_ab);

    // steady state of  H_u Y - Y H_g - i Gamma Y + S = 0,  Y[k][j] at 2k + j
    let mut m = DMatrix::<C>::zeros(8, 8);
    let mut rhs = DVector::<C>::zeros(8);
    for k in 0..4 {
        for j in 0..2 {
            let row = 2 * k + j;
            for q in 0..4 {
                m[(row, 2 * q + j)] += h_u[k][q];
            }
            for n in 0..2 {
                m[(row, 2 * k + n)] -= re(h_g[n][j]);
            }
            m[(row, row)] -= C::new(0.0, decay[k]);
            if k == 0 {
                rhs[row] = -probe * rho0(0, j);
            }
        }
    }
    let y = m
        .lu()
        .solve(&rhs)
        .expect("bare Liouville system is singular");
    y[0]
}

/// Single-well EIT coherence written out for a resonant control field.
pub fn eit_reference(delta_p: f64, omega_ac: f64, gamma_ab: f64, omega_ab: f64) -> C {
    let d = C::new(delta_p, 0.0);
    d * omega_ab / (2.0 * (d * C::new(delta_p, -gamma_ab) - omega_ac * omega_ac / 4.0))
}

/// Log-uniform sample in `[lo, hi]` from a unit variate.
pub fn log_uniform(u: f64, lo: f64, hi: f64) -> f64 {
    (lo.ln() + u * (hi.ln() - lo.ln())).exp()
}
