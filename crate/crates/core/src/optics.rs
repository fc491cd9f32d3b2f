//! Susceptibility, index, dispersion and group velocity of the probe, plus
//! detuning scans and resonance analysis.
//!
//! `chi` is reported in figure units: `chi = 4 C gamma_ab rho_ab e^{i phi_ab} / Omega_ab`,
//! so that single-well EIT has the line-center slope
//! `dRe(chi)/d(omega_p) = 8 C gamma_ab / Omega_ac^2`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dressed::DressedFrame;
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::steady::closed_form_coherence;

/// `Re chi` this far below -1 is still treated as roundoff around `n = 0`.
const INDEX_SLACK: f64 = 1e-12;
/// Smallest step the adaptive slope will try, relative to `gamma_ab`.
const MIN_STEP: f64 = 1e-14;
/// Half-width of a refinement window, in predicted linewidths.
pub const REFINE_HALF_WIDTH: f64 = 20.0;
/// Refinement step, as a fraction of the predicted linewidth.
pub const REFINE_STEP: f64 = 1.0 / 16.0;
/// Coarsest spacing that still resolves a narrow resonance.
pub const RESOLUTION: f64 = 1.0 / 8.0;

/// Absolute scale of the probe beam: carrier frequency (in the same unit as
/// the rates) and wavenumber for the absorption coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeScale {
    pub omega_p: f64,
    pub k_p: f64,
}

impl Default for ProbeScale {
    fn default() -> Self {
        ProbeScale {
            omega_p: 1e8,
            k_p: 1.0,
        }
    }
}

pub fn susceptibility(coh: C64, p: &SystemParams) -> C64 {
    4.0 * p.prefactor * p.gamma_ab * coh * C64::from_polar(1.0, p.phi_ab) / p.omega_ab
}

/// Susceptibility at one probe detuning from the closed form.
pub fn chi_at(p: &SystemParams, delta_p: f64) -> Result<C64> {
    closed_form_coherence(p, delta_p).map(|c| susceptibility(c, p))
}

pub fn refractive_index(chi: C64) -> Result<f64> {
    let v = 1.0 + chi.re;
    if v < -INDEX_SLACK || v.is_nan() {
        return Err(Error::UnphysicalIndex { re_chi: chi.re });
    }
    Ok(v.max(0.0).sqrt())
}

/// Width `2 (g_c_eff / Omega_ac)^2 gamma_ab` of the tunneling-induced
/// resonances. Without a control field the lines are plain Lorentzians of
/// width `2 gamma_ab`.
pub fn predicted_fwhm(p: &SystemParams) -> f64 {
    if p.omega_ac == 0.0 {
        return 2.0 * p.gamma_ab;
    }
    let r = DressedFrame::from_params(p).g_c_eff / p.omega_ac;
    2.0 * r * r * p.gamma_ab
}

/// Width of the tunneling-induced resonances when they exist, i.e. with
/// both a control field and a split {c, c'} doublet.
pub fn narrow_linewidth(p: &SystemParams) -> Option<f64> {
    let g_c = DressedFrame::from_params(p).g_c_eff;
    (p.omega_ac > 0.0 && g_c > 0.0).then(|| predicted_fwhm(p))
}

/// Probe detunings of the narrow resonances, `+-g_b_eff/2` moved by the
/// mean-field shift of the probe detuning. A single center when the
/// {b, b'} doublet is unsplit.
pub fn predicted_centers(p: &SystemParams) -> Vec<f64> {
    let shift = p.u_bb / 2.0 - p.u_ab;
    let g = DressedFrame::from_params(p).g_b_eff;
    if g == 0.0 {
        vec![shift]
    } else {
        vec![shift - g / 2.0, shift + g / 2.0]
    }
}

pub fn default_step(p: &SystemParams) -> f64 {
    let g_c = DressedFrame::from_params(p).g_c_eff;
    (g_c.max(predicted_fwhm(p)) / 100.0).max(1e-8 * p.gamma_ab)
}

fn central_difference(p: &SystemParams, delta_p: f64, h: f64) -> Result<(f64, f64)> {
    let hi = chi_at(p, delta_p + h)?.re;
    let lo = chi_at(p, delta_p - h)?.re;
    Ok(((hi - lo) / (2.0 * h), hi.abs().max(lo.abs())))
}

/// `dRe(chi)/d(omega_p)` by a central difference with one Richardson step.
/// Since `delta_p` decreases as `omega_p` grows this is minus the slope in
/// `delta_p`.
pub fn dispersion_slope(p: &SystemParams, delta_p: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::StepTooLarge {
            h,
            coarse: f64::NAN,
            fine: f64::NAN,
        });
    }
    let (coarse, m1) = central_difference(p, delta_p, h)?;
    let (fine, m2) = central_difference(p, delta_p, h / 2.0)?;
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    let noise = 1e-12 * m1.max(m2) / (h / 2.0);
    if (extrapolated - fine).abs() > 0.01 * extrapolated.abs() + noise {
        return Err(Error::StepTooLarge { h, coarse, fine });
    }
    Ok(-extrapolated)
}

/// [`dispersion_slope`] starting from [`default_step`] and halving the step
/// until the Richardson check passes.
pub fn adaptive_dispersion_slope(p: &SystemParams, delta_p: f64) -> Result<f64> {
    let floor = MIN_STEP * p.gamma_ab;
    let mut h = default_step(p);
    loop {
        match dispersion_slope(p, delta_p, h) {
            Err(Error::StepTooLarge { .. }) if h / 2.0 >= floor => h /= 2.0,
            other => return other,
        }
    }
}

/// `n + (omega_p / 2n) dRe(chi)/d(omega_p)`; the group velocity is `c` over this.
fn group_index(n: f64, slope: f64, scale: &ProbeScale) -> f64 {
    n + scale.omega_p * slope / (2.0 * n)
}

/// Group index of single-well EIT at line center, the reference for
/// [`group_velocity_ratio`].
pub fn reference_group_index(p: &SystemParams, scale: &ProbeScale) -> Result<f64> {
    let r = p.standard_eit();
    let n = refractive_index(chi_at(&r, 0.0)?)?;
    Ok(group_index(n, adaptive_dispersion_slope(&r, 0.0)?, scale))
}

/// `v_g(delta_p) / v_EIT`.
pub fn group_velocity_ratio(p: &SystemParams, delta_p: f64, scale: &ProbeScale) -> Result<f64> {
    let n = refractive_index(chi_at(p, delta_p)?)?;
    let slope = adaptive_dispersion_slope(p, delta_p)?;
    Ok(reference_group_index(p, scale)? / group_index(n, slope, scale))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    /// Insert dense windows around the predicted narrow resonances.
    pub refine: bool,
}

/// Strictly increasing detuning grid.
///
/// With refinement, windows of `+-20` linewidths at spacing of 1/16
/// linewidth are laid over each predicted center; overlapping windows merge
/// and uniform points falling inside a window are dropped.
pub fn build_grid(p: &SystemParams, spec: &GridSpec) -> Result<Vec<f64>> {
    if spec.count < 2 {
        return Err(Error::InvalidGrid(format!(
            "count must be >= 2 (got {})",
            spec.count
        )));
    }
    if !(spec.min < spec.max) || !spec.min.is_finite() || !spec.max.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "need finite min < max (got {}, {})",
            spec.min, spec.max
        )));
    }
    let span = spec.max - spec.min;
    let last = spec.count - 1;
    let uniform = (0..spec.count).map(|i| {
        if i == last {
            spec.max
        } else {
            spec.min + span * i as f64 / last as f64
        }
    });
    let width = match narrow_linewidth(p) {
        Some(w) if spec.refine && w > 0.0 => w,
        _ => return Ok(uniform.collect()),
    };

    let half = REFINE_HALF_WIDTH * width;
    let mut windows: Vec<(f64, f64)> = Vec::new();
    for c in predicted_centers(p) {
        let (lo, hi) = ((c - half).max(spec.min), (c + half).min(spec.max));
        if lo >= hi {
            continue;
        }
        match windows.last_mut() {
            Some(w) if lo <= w.1 => w.1 = w.1.max(hi),
            _ => windows.push((lo, hi)),
        }
    }
    let step = REFINE_STEP * width;
    let mut grid: Vec<f64> = uniform
        .filter(|&x| !windows.iter().any(|&(lo, hi)| x >= lo && x <= hi))
        .collect();
    for &(lo, hi) in &windows {
        let n = ((hi - lo) / step).ceil() as usize;
        grid.extend((0..=n).map(|i| {
            if i == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / n as f64
            }
        }));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub delta_p: f64,
    pub chi: C64,
    /// `k_p Im(chi)`.
    pub alpha: f64,
    pub n: f64,
    pub dre_chi_domega: f64,
    pub vg_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumScan {
    pub params: SystemParams,
    pub grid: GridSpec,
    pub scale: ProbeScale,
    pub points: Vec<SpectrumPoint>,
}

/// Evaluates every grid point in parallel; output order follows the grid.
pub fn scan(p: &SystemParams, grid: &GridSpec, scale: &ProbeScale) -> Result<SpectrumScan> {
    let xs = build_grid(p, grid)?;
    let reference = reference_group_index(p, scale)?;
    let points = xs
        .par_iter()
        .map(|&d| {
            let chi = chi_at(p, d)?;
            let n = refractive_index(chi)?;
            let slope = adaptive_dispersion_slope(p, d)?;
            Ok(SpectrumPoint {
                delta_p: d,
                chi,
                alpha: scale.k_p * chi.im,
                n,
                dre_chi_domega: slope,
                vg_ratio: reference / group_index(n, slope, scale),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumScan {
        params: *p,
        grid: *grid,
        scale: *scale,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakReport {
    pub center: f64,
    /// `Im chi` at the refined maximum.
    pub height: f64,
    pub fwhm: f64,
    pub predicted_fwhm: f64,
}

/// Vertex of the parabola through three points, offsets taken from the middle
/// sample to keep precision when the spacing is tiny compared with `x`.
fn vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let (d0, d2) = (x[0] - x[1], x[2] - x[1]);
    let (s0, s2) = ((y[0] - y[1]) / d0, (y[2] - y[1]) / d2);
    let a = (s2 - s0) / (d2 - d0);
    if !(a < 0.0) {
        return (x[1], y[1]);
    }
    let b = s2 - a * d2;
    let u = (-b / (2.0 * a)).clamp(d0, d2);
    (x[1] + u, y[1] + b * u + a * u * u)
}

fn crossing(x: &[f64], y: &[f64], i: usize, j: usize, level: f64) -> f64 {
    let t = (level - y[i]) / (y[j] - y[i]);
    x[i] + t * (x[j] - x[i])
}

/// Local maxima of `Im chi` with sub-grid refinement and half-height widths.
///
/// Plateaus resolve to their leftmost sample. Maxima whose height does not
/// clear the roundoff floor, or whose half-height is not crossed on both
/// sides within the scan, are skipped.
pub fn find_peaks(scan: &SpectrumScan) -> Result<Vec<PeakReport>> {
    let x: Vec<f64> = scan.points.iter().map(|s| s.delta_p).collect();
    let y: Vec<f64> = scan.points.iter().map(|s| s.chi.im).collect();
    let predicted = predicted_fwhm(&scan.params);
    if let Some(width) = narrow_linewidth(&scan.params) {
        check_resolution(&scan.params, &x, width)?;
    }

    let floor = 1e-9 * scan.points.iter().map(|s| s.chi.norm()).fold(0.0, f64::max);
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if !(y[i] > y[i - 1]) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && y[j + 1] == y[i] {
            j += 1;
        }
        if j + 1 >= n || !(y[j + 1] < y[i]) || !(y[i] > floor) {
            i = j + 1;
            continue;
        }
        let (center, height) = vertex([x[i - 1], x[i], x[i + 1]], [y[i - 1], y[i], y[i + 1]]);
        let half = height / 2.0;
        let left = (0..i).rev().find(|&k| y[k] < half);
        let right = (j + 1..n).find(|&k| y[k] < half);
        if let (Some(l), Some(r)) = (left, right) {
            let fwhm = crossing(&x, &y, r - 1, r, half) - crossing(&x, &y, l, l + 1, half);
            out.push(PeakReport {
                center,
                height,
                fwhm,
                predicted_fwhm: predicted,
            });
        }
        i = j + 1;
    }
    Ok(out)
}

fn check_resolution(p: &SystemParams, x: &[f64], width: f64) -> Result<()> {
    if !(width > 0.0) || x.len() < 2 {
        return Ok(());
    }
    let required = RESOLUTION * width;
    for center in predicted_centers(p) {
        if center < x[0] || center > x[x.len() - 1] {
            continue;
        }
        let k = x.partition_point(|&v| v < center).clamp(1, x.len() - 1);
        let spacing = x[k] - x[k - 1];
        if spacing > required * (1.0 + 1e-9) {
            return Err(Error::UnresolvedFeature {
                center,
                spacing,
                required,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RawParams;
    use crate::steady::standard_eit_coherence;

    fn narrow() -> SystemParams {
        RawParams {
            omega_ac: Some(2.0),
            gamma_a: Some(2.0),
            gamma_ab: Some(1.0),
            g_b: Some(2e-4),
            g_c: Some(2e-4),
            ..Default::default()
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn index_examples() {
        assert_eq!(refractive_index(C64::new(0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(refractive_index(C64::new(3.0, 1.0)).unwrap(), 2.0);
        assert!(matches!(
            refractive_index(C64::new(-2.0, 0.0)),
            Err(Error::UnphysicalIndex { .. })
        ));
    }

    #[test]
    fn transparency_at_line_center() {
        let p = narrow().standard_eit();
        let coh = standard_eit_coherence(0.0, 2.0, 1.0, p.omega_ab, 0.0);
        assert_eq!(susceptibility(coh, &p), C64::new(0.0, 0.0));
    }

    #[test]
    fn prefactor_is_linear() {
        let mut p = narrow();
        let a = chi_at(&p, 1.3e-4).unwrap();
        p.prefactor = 2.0;
        assert_eq!(chi_at(&p, 1.3e-4).unwrap(), 2.0 * a);
    }

    #[test]
    fn standard_slope_at_line_center() {
        let p = narrow().standard_eit();
        let s = adaptive_dispersion_slope(&p, 0.0).unwrap();
        let want = 8.0 * p.gamma_ab / (p.omega_ac * p.omega_ac);
        assert!((s - want).abs() < 1e-8 * want);
    }

    #[test]
    fn flat_susceptibility_has_zero_slope() {
        let mut p = narrow();
        p.prefactor = 0.0;
        assert_eq!(dispersion_slope(&p, 0.1, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn huge_step_is_rejected() {
        let p = narrow();
        assert!(matches!(
            dispersion_slope(&p, 1e-4, 1e-4),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn reference_ratio_is_one() {
        let p = narrow().standard_eit();
        let r = group_velocity_ratio(&p, 0.0, &ProbeScale::default()).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_validation() {
        let p = narrow();
        let g = |min, max, count| GridSpec {
            min,
            max,
            count,
            refine: false,
        };
        assert!(matches!(
            build_grid(&p, &g(0.0, 1.0, 1)),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            build_grid(&p, &g(1.0, 1.0, 5)),
            Err(Error::InvalidGrid(_))
        ));
        assert_eq!(
            build_grid(&p, &g(-1.0, 1.0, 3)).unwrap(),
            vec![-1.0, 0.0, 1.0]
        );
    }

    #[test]
    fn refined_grid_is_dense_near_resonances() {
        let p = narrow();
        let grid = build_grid(
            &p,
            &GridSpec {
                min: -1e-3,
                max: 1e-3,
                count: 101,
                refine: true,
            },
        )
        .unwrap();
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        let width = predicted_fwhm(&p);
        check_resolution(&p, &grid, width).unwrap();
        let near = grid
            .iter()
            .filter(|&&x| (x - 1e-4).abs() <= 20.0 * width)
            .count();
        assert_eq!(near, 641);
    }

    #[test]
    fn vertex_recovers_parabola() {
        let f = |x: f64| 3.0 - 2.0 * (x - 0.3).powi(2);
        let xs = [0.0, 0.25, 0.7];
        let (c, h) = vertex(xs, xs.map(f));
        assert!((c - 0.3).abs() < 1e-14 && (h - 3.0).abs() < 1e-14);
    }
}
