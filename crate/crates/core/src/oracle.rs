//! Independent checks on the steady state: the algebraic residual of
//! `M x = A`, and explicit time integration of `dX/dt = -M X + A` from
//! `X(0) = 0`.
//!
//! Integration only converges in reasonable model time when the slowest
//! relaxation rate of `M` is not tiny; with paper-scale tunneling (rates of
//! order the narrow linewidth) it reports non-convergence instead.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{matvec, norm, sub, Vec4, ZERO};
use crate::steady::LinearSystem;

/// Consecutive residual increases tolerated before declaring instability.
const GROWTH_WINDOW: usize = 10;
/// Residual beyond which integration is abandoned outright.
const BLOWUP: f64 = 1e6;

/// `||M x - A|| / ||A||`, or `||M x||` when the drive vanishes.
pub fn residual(sys: &LinearSystem, x: &Vec4) -> f64 {
    let r = norm(&sub(&matvec(&sys.m, x), &sys.a));
    let a = norm(&sys.a);
    if a == 0.0 {
        r
    } else {
        r / a
    }
}

/// Max absolute row sum of `M`, an upper bound on its spectral radius.
pub fn spectral_bound(sys: &LinearSystem) -> f64 {
    sys.m
        .iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Step size comfortably inside the RK4 stability region.
pub fn suggested_dt(sys: &LinearSystem) -> f64 {
    0.1 / spectral_bound(sys)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationReport {
    pub final_state: Vec4,
    pub steps: usize,
    pub elapsed_model_time: f64,
    pub converged: bool,
    pub residual: f64,
}

fn rhs(sys: &LinearSystem, x: &Vec4) -> Vec4 {
    sub(&sys.a, &matvec(&sys.m, x))
}

fn axpy(x: &Vec4, h: f64, k: &Vec4) -> Vec4 {
    std::array::from_fn(|i| x[i] + h * k[i])
}

fn rk4_step(sys: &LinearSystem, x: &Vec4, dt: f64) -> Vec4 {
    let k1 = rhs(sys, x);
    let k2 = rhs(sys, &axpy(x, dt / 2.0, &k1));
    let k3 = rhs(sys, &axpy(x, dt / 2.0, &k2));
    let k4 = rhs(sys, &axpy(x, dt, &k3));
    std::array::from_fn(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Fixed-step RK4 from `X = 0` until the residual drops to `tol` or `t_max`
/// is reached. Running out of time is reported through `converged`, not
/// as an error.
pub fn integrate_to_steady(
    sys: &LinearSystem,
    dt: f64,
    t_max: f64,
    tol: f64,
) -> Result<IntegrationReport> {
    let mut x = [ZERO; 4];
    let mut r = residual(sys, &x);
    let mut steps = 0usize;
    let mut rising = 0usize;
    let mut rise_start = r;
    let max_steps = (t_max / dt).ceil() as usize;
    while r > tol && steps < max_steps {
        x = rk4_step(sys, &x, dt);
        steps += 1;
        let next = residual(sys, &x);
        if !next.is_finite() || next > BLOWUP {
            return Err(Error::StepUnstable {
                step: steps,
                residual: next,
            });
        }
        if next > r {
            if rising == 0 {
                rise_start = r;
            }
            rising += 1;
            if rising >= GROWTH_WINDOW && next > 1.1 * rise_start {
                return Err(Error::StepUnstable {
                    step: steps,
                    residual: next,
                });
            }
        } else {
            rising = 0;
        }
        r = next;
    }
    Ok(IntegrationReport {
        final_state: x,
        steps,
        elapsed_model_time: steps as f64 * dt,
        converged: r <= tol,
        residual: r,
    })
}

/// State after exactly `steps` RK4 steps from `X = 0`.
pub fn integrate_for(sys: &LinearSystem, dt: f64, steps: usize) -> Vec4 {
    let mut x = [C64::new(0.0, 0.0); 4];
    for _ in 0..steps {
        x = rk4_step(sys, &x, dt);
    }
    x
}
