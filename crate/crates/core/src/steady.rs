//! Steady-state probe coherence to first order in the probe field.
//!
//! In the dressed frame the first-order coherences split into two
//! independent four-component systems, one per populated ground state:
//!
//! ```text
//! X = (rho_aX, rho_CX, rho_C'X, rho_a'X),   X in {B, B'}
//! i dX/dt = H X + s      <=>      dX/dt = -M X + A,   M = iH, A = -i s
//! ```
//!
//! The probe coherence is `rho_ab = cos(theta_b) x_B[0] - sin(theta_b) x_B'[0]`.
//! Two routes to the steady state are provided: a direct solve of `M x = A`
//! and the closed-form ratio of polynomials. They are independent and are
//! checked against each other.

use std::fmt;

use num_complex::Complex64 as C64;

use crate::dressed::DressedFrame;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat4, Vec4, I, ZERO};
use crate::model::SystemParams;

/// Below this magnitude a denominator is treated as an exact zero.
const POLE_FLOOR: f64 = 1e-300;

/// Dressed ground state that carries the zeroth-order population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Lower dressed state, resonance at `delta_p = -g_b_eff/2`.
    B,
    /// Upper dressed state, resonance at `delta_p = +g_b_eff/2`.
    BPrime,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::B, Branch::BPrime];

    /// `+1` for B, `-1` for B'; the sign of `g_b_eff/2` in the diagonal.
    fn sign(self) -> f64 {
        match self {
            Branch::B => 1.0,
            Branch::BPrime => -1.0,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::B => f.write_str("B"),
            Branch::BPrime => f.write_str("B'"),
        }
    }
}

/// Zeroth-order populations `(rho_BB, rho_B'B')`.
pub fn dressed_populations(p: &SystemParams) -> (f64, f64) {
    let frame = DressedFrame::from_params(p);
    let theta_b = frame.sin_b.atan2(frame.cos_b);
    let c = (theta_b - p.phi_prep).cos();
    let s = (theta_b - p.phi_prep).sin();
    (c * c, s * s)
}

/// `dX/dt = -M X + A` for one branch at one probe detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSystem {
    pub m: Mat4,
    pub a: Vec4,
    pub branch: Branch,
}

/// Builds the first-order system of one branch.
pub fn build_linear_system(p: &SystemParams, delta_p: f64, branch: Branch) -> LinearSystem {
    let f = DressedFrame::from_params(p);
    let (rho_bb, rho_bpbp) = dressed_populations(p);
    let sg = branch.sign();
    let half_om = p.omega_ac / 2.0;
    let e_ac = C64::from_polar(1.0, p.phi_ac);
    let e_ab = C64::from_polar(1.0, -p.phi_ab);

    let base = delta_p + sg * f.g_b_eff / 2.0 - p.u_bb / 2.0;
    let d_a = C64::new(base + p.u_ab, -p.gamma_ab);
    let d_c = C64::new(base - p.delta_mu - f.g_c_eff / 2.0 + p.u_cb / 2.0, 0.0);
    let d_cp = C64::new(base - p.delta_mu + f.g_c_eff / 2.0 + p.u_cb / 2.0, 0.0);
    let ga = C64::new(-p.g_a / 2.0, 0.0);

    let h: Mat4 = [
        [
            d_a,
            -half_om * f.cos_c * e_ac.conj(),
            half_om * f.sin_c * e_ac.conj(),
            ga,
        ],
        [-half_om * f.cos_c * e_ac, d_c, ZERO, ZERO],
        [half_om * f.sin_c * e_ac, ZERO, d_cp, ZERO],
        [ga, ZERO, ZERO, d_a],
    ];
    let s0 = match branch {
        Branch::B => -(p.omega_ab / 2.0) * e_ab * f.cos_b * rho_bb,
        Branch::BPrime => (p.omega_ab / 2.0) * e_ab * f.sin_b * rho_bpbp,
    };
    let m = h.map(|row| row.map(|z| I * z));
    LinearSystem {
        m,
        a: [-I * s0, ZERO, ZERO, ZERO],
        branch,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadySolution {
    pub x: Vec4,
    /// 1-norm condition number of `M`.
    pub condition: f64,
}

/// Solves `M x = A` directly.
pub fn solve_steady(sys: &LinearSystem) -> Result<SteadySolution> {
    let x = linalg::solve(&sys.m, &sys.a)?;
    let condition = linalg::condition_number(&sys.m)?;
    if condition > 1e12 {
        log::warn!(
            "branch {} system is ill-conditioned (cond = {condition:e})",
            sys.branch
        );
    }
    Ok(SteadySolution { x, condition })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyCoherences {
    pub x_b: Vec4,
    pub x_bp: Vec4,
    pub rho_ab: C64,
    pub rho_aa: f64,
}

/// Steady state of both branches by direct linear solves.
pub fn steady_coherences(p: &SystemParams, delta_p: f64) -> Result<SteadyCoherences> {
    let f = DressedFrame::from_params(p);
    let x_b = solve_steady(&build_linear_system(p, delta_p, Branch::B))?.x;
    let x_bp = solve_steady(&build_linear_system(p, delta_p, Branch::BPrime))?.x;
    let rho_ab = f.cos_b * x_b[0] - f.sin_b * x_bp[0];
    Ok(SteadyCoherences {
        x_b,
        x_bp,
        rho_ab,
        rho_aa: population_from_coherence(p, rho_ab),
    })
}

/// Per-branch terms of the closed-form coherence; `rho_ab = b + b_prime`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchTerms {
    pub b: C64,
    pub b_prime: C64,
}

impl BranchTerms {
    pub fn total(&self) -> C64 {
        self.b + self.b_prime
    }

    pub fn get(&self, branch: Branch) -> C64 {
        match branch {
            Branch::B => self.b,
            Branch::BPrime => self.b_prime,
        }
    }
}

/// `P E / zeta` for one branch, with removable singularities resolved.
fn response(p: &SystemParams, f: &DressedFrame, delta_p: f64, branch: Branch) -> Result<C64> {
    let sg = branch.sign();
    let dp = p.shifted_probe_detuning(delta_p);
    let dmu = p.shifted_control_detuning();
    let gc = f.g_c_eff;
    let x = 2.0 * dmu - 2.0 * dp - sg * f.g_b_eff;
    let e = C64::new(2.0 * dp + sg * f.g_b_eff, -2.0 * p.gamma_ab);
    let ga2 = p.g_a * p.g_a;
    let om2 = p.omega_ac * p.omega_ac;
    let pole = || Error::PoleEncountered { branch, delta_p };

    if om2 == 0.0 {
        let d = e * e - ga2;
        return if d.norm() <= POLE_FLOOR {
            Err(pole())
        } else {
            Ok(e / d)
        };
    }
    let big_p = (x - gc) * (x + gc);
    let cos2c = f.c().cos_2theta();
    let zeta = big_p * (e * e - ga2) + e * (x - gc * cos2c) * om2;
    if zeta.norm() > POLE_FLOOR {
        return Ok(big_p * e / zeta);
    }
    let scale = x * x + gc * gc;
    if big_p.abs() > 1e-12 * scale {
        return Err(pole());
    }
    // P and zeta vanish together only when one C state decouples; divide the
    // common factor out.
    let mut sum = 0.0;
    for (w, den) in [(f.sin_c * f.sin_c, x - gc), (f.cos_c * f.cos_c, x + gc)] {
        if w == 0.0 {
            continue;
        }
        if den == 0.0 {
            return Ok(ZERO);
        }
        sum += w / den;
    }
    let d = e * e - ga2 + e * om2 * sum;
    if d.norm() <= POLE_FLOOR {
        Err(pole())
    } else {
        Ok(e / d)
    }
}

/// Closed-form branch contributions to `rho_ab`.
pub fn closed_form_branches(p: &SystemParams, delta_p: f64) -> Result<BranchTerms> {
    let f = DressedFrame::from_params(p);
    let (rho_bb, rho_bpbp) = dressed_populations(p);
    let amp = p.omega_ab * C64::from_polar(1.0, -p.phi_ab);
    let b = amp * (f.cos_b * f.cos_b * rho_bb) * response(p, &f, delta_p, Branch::B)?;
    let b_prime = amp * (f.sin_b * f.sin_b * rho_bpbp) * response(p, &f, delta_p, Branch::BPrime)?;
    Ok(BranchTerms { b, b_prime })
}

/// Closed-form steady-state probe coherence `rho_ab`.
pub fn closed_form_coherence(p: &SystemParams, delta_p: f64) -> Result<C64> {
    closed_form_branches(p, delta_p).map(|t| t.total())
}

/// Full steady-state vector of one branch with `x[0]` from the closed form
/// and the remaining components back-substituted.
pub fn closed_form_vector(p: &SystemParams, delta_p: f64, branch: Branch) -> Result<Vec4> {
    let f = DressedFrame::from_params(p);
    let (rho_bb, rho_bpbp) = dressed_populations(p);
    let amp = p.omega_ab * C64::from_polar(1.0, -p.phi_ab);
    let r = response(p, &f, delta_p, branch)?;
    let x0 = match branch {
        Branch::B => amp * f.cos_b * rho_bb * r,
        Branch::BPrime => -amp * f.sin_b * rho_bpbp * r,
    };
    let sys = build_linear_system(p, delta_p, branch);
    // M x = A, row by row; rows 1..3 each couple only to x[0].
    let m = &sys.m;
    let from_row = |k: usize| {
        if m[k][k] == ZERO {
            None
        } else {
            Some(-m[k][0] * x0 / m[k][k])
        }
    };
    let x3 = from_row(3).unwrap_or(ZERO);
    let x2 = from_row(2);
    let x1 = from_row(1);
    let rest = |skip: usize, x1: C64, x2: C64| {
        let pivot = m[0][skip];
        if pivot == ZERO {
            return ZERO;
        }
        let s = sys.a[0] - m[0][0] * x0 - m[0][1] * x1 - m[0][2] * x2 - m[0][3] * x3;
        s / pivot
    };
    let (x1, x2) = match (x1, x2) {
        (Some(a), Some(b)) => (a, b),
        (None, Some(b)) => (rest(1, ZERO, b), b),
        (Some(a), None) => (a, rest(2, a, ZERO)),
        (None, None) => (ZERO, ZERO),
    };
    Ok([x0, x1, x2, x3])
}

/// Symmetric-well coherence written in the two-resonance form
/// `(Omega_ab e^{-i phi_ab} / 2) (Z+ + Z-) / 2`.
///
/// `Z+` belongs to the upper dressed state (resonance at `+g_b/2`) and
/// carries the population factor `1 - sin(2 phi)`; `Z-` carries
/// `1 + sin(2 phi)`.
pub fn degenerate_coherence(p: &SystemParams, delta_p: f64) -> Result<C64> {
    if p.delta_bb != 0.0 || p.delta_cc != 0.0 || !(p.g_b > 0.0) {
        return Err(Error::NotDegenerate);
    }
    let dp = p.shifted_probe_detuning(delta_p);
    let dmu = p.shifted_control_detuning();
    let s2 = (2.0 * p.phi_prep).sin();
    let (gb, gc, ga) = (p.g_b, p.g_c, p.g_a);
    let om2 = p.omega_ac * p.omega_ac;

    let z = |sign: f64, branch: Branch| -> Result<C64> {
        let x = 2.0 * dmu - 2.0 * dp + sign * gb;
        let e = C64::new(2.0 * dp - sign * gb, -2.0 * p.gamma_ab);
        let q = x * x - gc * gc;
        let weight = 1.0 - sign * s2;
        let num = q * e * weight;
        let den = q * (e * e - ga * ga) + x * e * om2;
        if den.norm() > POLE_FLOOR {
            return Ok(num / den);
        }
        // q and den share the factor (x - gc) when gc = 0 or omega = 0.
        let reduced = if om2 == 0.0 {
            e * e - ga * ga
        } else if q == 0.0 && x == 0.0 {
            // gc = 0 and x = 0: the control pins the coherence to zero
            return Ok(ZERO);
        } else if q.abs() <= 1e-12 * (x * x + gc * gc) {
            e * e - ga * ga + e * om2 * x / q
        } else {
            C64::new(0.0, 0.0)
        };
        if reduced.norm() <= POLE_FLOOR {
            Err(Error::PoleEncountered { branch, delta_p })
        } else {
            Ok(e * weight / reduced)
        }
    };
    let zp = z(1.0, Branch::BPrime)?;
    let zm = z(-1.0, Branch::B)?;
    Ok(p.omega_ab * C64::from_polar(1.0, -p.phi_ab) / 2.0 * (zp + zm) / 2.0)
}

fn population_from_coherence(p: &SystemParams, rho_ab: C64) -> f64 {
    if p.omega_ab == 0.0 {
        return 0.0;
    }
    let t = rho_ab * C64::from_polar(1.0, p.phi_ab) / p.omega_ab;
    2.0 * p.omega_ab * p.omega_ab * t.im / p.gamma_a
}

/// Excited-state population to second order in the probe,
/// `(i Omega_ab^2 / gamma_a)(T* - T)` with `T = rho_ab e^{i phi_ab} / Omega_ab`.
pub fn population_aa(p: &SystemParams, delta_p: f64) -> Result<f64> {
    closed_form_coherence(p, delta_p).map(|c| population_from_coherence(p, c))
}

/// Single-well EIT coherence with a resonant control laser.
pub fn standard_eit_coherence(
    delta_p: f64,
    omega_ac: f64,
    gamma_ab: f64,
    omega_ab: f64,
    phi_ab: f64,
) -> C64 {
    let num = delta_p * omega_ab * C64::from_polar(1.0, -phi_ab);
    let den = 2.0 * (delta_p * C64::new(delta_p, -gamma_ab) - omega_ac * omega_ac / 4.0);
    num / den
}
