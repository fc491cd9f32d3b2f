//! Small dense complex linear algebra for the 4x4 coherence systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Vec4 = [C64; 4];
pub type Mat4 = [[C64; 4]; 4];

/// Pivots below this magnitude are treated as exact zeros.
pub const PIVOT_FLOOR: f64 = 1e-300;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn matvec<const N: usize>(m: &[[C64; N]; N], x: &[C64; N]) -> [C64; N] {
    std::array::from_fn(|i| m[i].iter().zip(x).map(|(a, b)| a * b).sum())
}

pub fn norm<const N: usize>(x: &[C64; N]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn sub<const N: usize>(x: &[C64; N], y: &[C64; N]) -> [C64; N] {
    std::array::from_fn(|i| x[i] - y[i])
}

/// Gaussian elimination with partial pivoting.
pub fn solve<const N: usize>(m: &[[C64; N]; N], b: &[C64; N]) -> Result<[C64; N]> {
    let mut a = *m;
    let mut x = *b;
    for k in 0..N {
        let p = (k..N)
            .max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm()))
            .unwrap_or(k);
        let pivot = a[p][k].norm();
        if !(pivot >= PIVOT_FLOOR) {
            return Err(Error::SingularSystem { pivot });
        }
        a.swap(k, p);
        x.swap(k, p);
        for i in k + 1..N {
            let f = a[i][k] / a[k][k];
            if f == ZERO {
                continue;
            }
            for j in k..N {
                let akj = a[k][j];
                a[i][j] -= f * akj;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for k in (0..N).rev() {
        let s: C64 = (k + 1..N).map(|j| a[k][j] * x[j]).sum();
        x[k] = (x[k] - s) / a[k][k];
    }
    Ok(x)
}

fn norm1<const N: usize>(m: &[[C64; N]; N]) -> f64 {
    (0..N)
        .map(|j| (0..N).map(|i| m[i][j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 1-norm condition number, computed exactly from the N columns of the
/// inverse.
pub fn condition_number<const N: usize>(m: &[[C64; N]; N]) -> Result<f64> {
    let mut inv = [[ZERO; N]; N];
    for j in 0..N {
        let mut e = [ZERO; N];
        e[j] = C64::new(1.0, 0.0);
        let col = solve(m, &e)?;
        for i in 0..N {
            inv[i][j] = col[i];
        }
    }
    Ok(norm1(m) * norm1(&inv))
}
