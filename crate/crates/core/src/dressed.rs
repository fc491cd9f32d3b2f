//! Dressed bases of the tunnel-coupled doublets and of the laser-coupled
//! {|a>, |c>, |c'>} triplet.
//!
//! A doublet {|x>, |x'>} with well asymmetry `delta` and tunneling `g` is
//! diagonalized by an SO(2) rotation with angle `theta`:
//!
//! ```text
//! cos(theta) = sqrt((1 - delta/g_eff)/2)
//! sin(theta) = sqrt((1 + delta/g_eff)/2)
//! g_eff      = sqrt(delta^2 + g^2)
//! ```
//!
//! Both components are taken non-negative.

use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Rotation of one tunnel-coupled doublet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mixing {
    pub cos: f64,
    pub sin: f64,
    /// Splitting between the two dressed states.
    pub g_eff: f64,
}

impl Mixing {
    /// The bare basis: no rotation, no splitting.
    pub const BARE: Mixing = Mixing {
        cos: 1.0,
        sin: 0.0,
        g_eff: 0.0,
    };

    /// `cos(2 theta) = cos^2 - sin^2`, which equals `-delta/g_eff`.
    pub fn cos_2theta(&self) -> f64 {
        (self.cos - self.sin) * (self.cos + self.sin)
    }
}

/// Mixing angle and effective splitting of a doublet.
///
/// Fails with [`Error::DegenerateSubspace`] when `delta == g == 0`, where the
/// angle is undefined.
pub fn mixing(delta: f64, g: f64) -> Result<Mixing> {
    if delta == 0.0 && g == 0.0 {
        return Err(Error::DegenerateSubspace {
            subspace: "doublet",
        });
    }
    let g_eff = delta.hypot(g);
    let ratio = delta / g_eff;
    // The larger component comes from its square root; the smaller one from
    // 2 cos sin = g/g_eff, which avoids cancellation in 1 -|ratio|.
    let large = ((1.0 + ratio.abs()) / 2.0).sqrt();
    let small = if delta == 0.0 {
        large
    } else {
        g / (2.0 * g_eff * large)
    };
    let (cos, sin) = if ratio <= 0.0 {
        (large, small)
    } else {
        (small, large)
    };
    Ok(Mixing { cos, sin, g_eff })
}

fn doublet(delta: f64, g: f64) -> Mixing {
    if delta == 0.0 && g == 0.0 {
        Mixing::BARE
    } else {
        // only fails for delta == g == 0
        mixing(delta, g).unwrap_or(Mixing::BARE)
    }
}

/// Mixing angles of the {b, b'} and {c, c'} doublets for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedFrame {
    pub cos_b: f64,
    pub sin_b: f64,
    pub cos_c: f64,
    pub sin_c: f64,
    pub g_b_eff: f64,
    pub g_c_eff: f64,
}

impl DressedFrame {
    /// Frame for a configuration. A doublet with neither tunneling nor
    /// asymmetry is left in the bare basis (`theta = 0`): the wells are
    /// independent, so the bare states are already stationary.
    pub fn from_params(p: &SystemParams) -> DressedFrame {
        DressedFrame::from_mixings(doublet(p.delta_bb, p.g_b), doublet(p.delta_cc, p.g_c))
    }

    pub fn from_mixings(b: Mixing, c: Mixing) -> DressedFrame {
        DressedFrame {
            cos_b: b.cos,
            sin_b: b.sin,
            cos_c: c.cos,
            sin_c: c.sin,
            g_b_eff: b.g_eff,
            g_c_eff: c.g_eff,
        }
    }

    /// Frame with both doublets rotated by the given angles and no splitting.
    pub fn from_angles(theta_b: f64, theta_c: f64) -> DressedFrame {
        DressedFrame {
            cos_b: theta_b.cos(),
            sin_b: theta_b.sin(),
            cos_c: theta_c.cos(),
            sin_c: theta_c.sin(),
            g_b_eff: 0.0,
            g_c_eff: 0.0,
        }
    }

    pub fn b(&self) -> Mixing {
        Mixing {
            cos: self.cos_b,
            sin: self.sin_b,
            g_eff: self.g_b_eff,
        }
    }

    pub fn c(&self) -> Mixing {
        Mixing {
            cos: self.cos_c,
            sin: self.sin_c,
            g_eff: self.g_c_eff,
        }
    }
}

/// Orthogonal map from the bare basis (a, b, c, a', b', c') to the dressed
/// basis (a, B, C, a', B', C').
pub fn rotation_matrix(frame: &DressedFrame) -> [[f64; 6]; 6] {
    let (cb, sb, cc, sc) = (frame.cos_b, frame.sin_b, frame.cos_c, frame.sin_c);
    [
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, cb, 0.0, 0.0, sb, 0.0],
        [0.0, 0.0, cc, 0.0, 0.0, sc],
        [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, -sb, 0.0, 0.0, cb, 0.0],
        [0.0, 0.0, -sc, 0.0, 0.0, cc],
    ]
}

/// Eigensystem of the {|a>, |c>, |c'>} block with a resonant control laser
/// and symmetric wells. Energies are measured from the bare |a> level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccEigensystem {
    pub e_plus: f64,
    pub e_minus: f64,
    pub e_zero: f64,
    /// Components over (|a>, |c>, |c'>).
    pub v_plus: [f64; 3],
    pub v_minus: [f64; 3],
    /// Tunneling-induced dark state; never contains |c>.
    pub v_zero: [f64; 3],
}

/// Matrix of the {|a>, |c>, |c'>} block (in units of hbar, relative to
/// the |a> energy).
pub fn acc_hamiltonian(omega_ac: f64, g_c: f64) -> [[f64; 3]; 3] {
    [
        [0.0, omega_ac / 2.0, 0.0],
        [omega_ac / 2.0, 0.0, -g_c / 2.0],
        [0.0, -g_c / 2.0, 0.0],
    ]
}

/// Diagonalizes [`acc_hamiltonian`].
///
/// With `tan(theta) = -omega_ac/g_c` the dark state is
/// `cos(theta)|a> - sin(theta)|c'>`; its overall sign is fixed so the |a>
/// component is non-negative (the |c'> component when that vanishes).
pub fn acc_eigensystem(omega_ac: f64, g_c: f64) -> Result<AccEigensystem> {
    if omega_ac == 0.0 && g_c == 0.0 {
        return Err(Error::DegenerateSubspace {
            subspace: "{a, c, c'}",
        });
    }
    let r = omega_ac.hypot(g_c);
    let (a, cp) = (omega_ac / r, g_c / r);
    let h = std::f64::consts::FRAC_1_SQRT_2;

    let mut v_zero = [cp, 0.0, a];
    if v_zero[0] < 0.0 || (v_zero[0] == 0.0 && v_zero[2] < 0.0) {
        v_zero = [-v_zero[0], 0.0, -v_zero[2]];
    }
    Ok(AccEigensystem {
        e_plus: r / 2.0,
        e_minus: -r / 2.0,
        e_zero: 0.0,
        v_plus: [a * h, h, -cp * h],
        v_minus: [a * h, -h, -cp * h],
        v_zero,
    })
}
