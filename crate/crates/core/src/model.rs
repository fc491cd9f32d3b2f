//! Physical configuration of the double-well Λ system.
//!
//! Rates and detunings share one unit. The CLI normalizes everything to
//! units of the optical coherence decay `gamma_ab`, which is also how the
//! library is exercised in its tests, but none of the formulas assume
//! `gamma_ab == 1`.
//!
//! The probe detuning is not part of the configuration; it is the scan
//! variable handed to every evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Probe Rabi frequency used when a config leaves it out.
pub const DEFAULT_OMEGA_AB: f64 = 1e-3;

/// One validated configuration.
///
/// Mean-field shifts `u_*` only enter as the detuning substitutions
/// `delta_p - u_bb/2 + u_ab` and `delta_mu - u_cb/2 + u_ab`; populations are
/// not fed back self-consistently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Control Rabi frequency between |a> and |c>.
    pub omega_ac: f64,
    /// Probe Rabi frequency between |a> and |b>; only an overall linear factor.
    pub omega_ab: f64,
    pub phi_ab: f64,
    pub phi_ac: f64,
    /// Excited-state population decay.
    pub gamma_a: f64,
    /// Optical coherence decay.
    pub gamma_ab: f64,
    pub g_a: f64,
    pub g_b: f64,
    pub g_c: f64,
    /// Mean-field energy difference between the wells for |b>.
    pub delta_bb: f64,
    /// Mean-field energy difference between the wells for |c>.
    pub delta_cc: f64,
    /// Control detuning, mean-field shift included.
    pub delta_mu: f64,
    /// Preparation angle fixing the initial dressed-state populations.
    pub phi_prep: f64,
    pub u_bb: f64,
    pub u_cb: f64,
    pub u_ab: f64,
    /// Optical-density constant multiplying the susceptibility.
    pub prefactor: f64,
}

/// Configuration as read from a file, before defaults are applied.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub omega_ac: Option<f64>,
    pub omega_ab: Option<f64>,
    pub phi_ab: Option<f64>,
    pub phi_ac: Option<f64>,
    pub gamma_a: Option<f64>,
    pub gamma_ab: Option<f64>,
    pub g_a: Option<f64>,
    pub g_b: Option<f64>,
    pub g_c: Option<f64>,
    pub delta_bb: Option<f64>,
    pub delta_cc: Option<f64>,
    pub delta_mu: Option<f64>,
    pub phi_prep: Option<f64>,
    pub u_bb: Option<f64>,
    pub u_cb: Option<f64>,
    pub u_ab: Option<f64>,
    pub prefactor: Option<f64>,
}

/// How strictly [`RawParams::validate_with`] treats the coherence decay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Every invariant enforced.
    #[default]
    Strict,
    /// Accepts `gamma_ab == 0` so undamped poles can be probed diagnostically.
    AllowUndamped,
}

impl RawParams {
    /// Fills defaults and checks every invariant. All violations are reported
    /// together.
    pub fn validate(&self) -> Result<SystemParams> {
        self.validate_with(Strictness::Strict)
    }

    pub fn validate_with(&self, strictness: Strictness) -> Result<SystemParams> {
        let mut violations = Vec::new();
        let mut required = |field: &'static str, value: Option<f64>| match value {
            Some(v) => v,
            None => {
                violations.push(Violation::Missing { field });
                f64::NAN
            }
        };
        let omega_ac = required("omega_ac", self.omega_ac);
        let gamma_a = required("gamma_a", self.gamma_a);

        let p = SystemParams {
            omega_ac,
            omega_ab: self.omega_ab.unwrap_or(DEFAULT_OMEGA_AB),
            phi_ab: self.phi_ab.unwrap_or(0.0),
            phi_ac: self.phi_ac.unwrap_or(0.0),
            gamma_a,
            gamma_ab: self.gamma_ab.unwrap_or(gamma_a / 2.0),
            g_a: self.g_a.unwrap_or(0.0),
            g_b: self.g_b.unwrap_or(0.0),
            g_c: self.g_c.unwrap_or(0.0),
            delta_bb: self.delta_bb.unwrap_or(0.0),
            delta_cc: self.delta_cc.unwrap_or(0.0),
            delta_mu: self.delta_mu.unwrap_or(0.0),
            phi_prep: self.phi_prep.unwrap_or(0.0),
            u_bb: self.u_bb.unwrap_or(0.0),
            u_cb: self.u_cb.unwrap_or(0.0),
            u_ab: self.u_ab.unwrap_or(0.0),
            prefactor: self.prefactor.unwrap_or(1.0),
        };
        if !violations.is_empty() {
            // NaN placeholders stand in for the missing fields.
            let missing = violations.clone();
            violations.extend(p.violations(strictness).into_iter().filter(|v| match v {
                Violation::NonFinite { field } => !missing.contains(&Violation::Missing { field }),
                _ => true,
            }));
            return Err(Error::InvalidParams(violations));
        }
        p.validate_with(strictness)
    }

    /// Multiplies every rate-valued field by `factor`; phases and the
    /// prefactor are untouched.
    pub fn scale_rates(&self, factor: f64) -> RawParams {
        let s = |v: Option<f64>| v.map(|x| x * factor);
        RawParams {
            omega_ac: s(self.omega_ac),
            omega_ab: s(self.omega_ab),
            gamma_a: s(self.gamma_a),
            gamma_ab: s(self.gamma_ab),
            g_a: s(self.g_a),
            g_b: s(self.g_b),
            g_c: s(self.g_c),
            delta_bb: s(self.delta_bb),
            delta_cc: s(self.delta_cc),
            delta_mu: s(self.delta_mu),
            u_bb: s(self.u_bb),
            u_cb: s(self.u_cb),
            u_ab: s(self.u_ab),
            ..self.clone()
        }
    }
}

impl From<SystemParams> for RawParams {
    fn from(p: SystemParams) -> Self {
        RawParams {
            omega_ac: Some(p.omega_ac),
            omega_ab: Some(p.omega_ab),
            phi_ab: Some(p.phi_ab),
            phi_ac: Some(p.phi_ac),
            gamma_a: Some(p.gamma_a),
            gamma_ab: Some(p.gamma_ab),
            g_a: Some(p.g_a),
            g_b: Some(p.g_b),
            g_c: Some(p.g_c),
            delta_bb: Some(p.delta_bb),
            delta_cc: Some(p.delta_cc),
            delta_mu: Some(p.delta_mu),
            phi_prep: Some(p.phi_prep),
            u_bb: Some(p.u_bb),
            u_cb: Some(p.u_cb),
            u_ab: Some(p.u_ab),
            prefactor: Some(p.prefactor),
        }
    }
}

impl SystemParams {
    fn fields(&self) -> [(&'static str, f64); 17] {
        [
            ("omega_ac", self.omega_ac),
            ("omega_ab", self.omega_ab),
            ("phi_ab", self.phi_ab),
            ("phi_ac", self.phi_ac),
            ("gamma_a", self.gamma_a),
            ("gamma_ab", self.gamma_ab),
            ("g_a", self.g_a),
            ("g_b", self.g_b),
            ("g_c", self.g_c),
            ("delta_bb", self.delta_bb),
            ("delta_cc", self.delta_cc),
            ("delta_mu", self.delta_mu),
            ("phi_prep", self.phi_prep),
            ("u_bb", self.u_bb),
            ("u_cb", self.u_cb),
            ("u_ab", self.u_ab),
            ("prefactor", self.prefactor),
        ]
    }

    fn violations(&self, strictness: Strictness) -> Vec<Violation> {
        let mut out: Vec<Violation> = self
            .fields()
            .iter()
            .filter(|(_, v)| !v.is_finite())
            .map(|&(field, _)| Violation::NonFinite { field })
            .collect();
        let positive = |out: &mut Vec<Violation>, field: &'static str, value: f64| {
            if value.is_finite() && value <= 0.0 {
                out.push(Violation::NonPositiveRate { field, value });
            }
        };
        positive(&mut out, "gamma_a", self.gamma_a);
        match strictness {
            Strictness::Strict => positive(&mut out, "gamma_ab", self.gamma_ab),
            Strictness::AllowUndamped if self.gamma_ab < 0.0 => {
                out.push(Violation::NegativeRate {
                    field: "gamma_ab",
                    value: self.gamma_ab,
                });
            }
            Strictness::AllowUndamped => {}
        }
        positive(&mut out, "omega_ab", self.omega_ab);
        for (field, value) in [("g_a", self.g_a), ("g_b", self.g_b), ("g_c", self.g_c)] {
            if value < 0.0 {
                out.push(Violation::NegativeRate { field, value });
            }
        }
        out
    }

    /// Re-checks the invariants; returns `self` unchanged when they hold.
    pub fn validate(&self) -> Result<SystemParams> {
        self.validate_with(Strictness::Strict)
    }

    pub fn validate_with(&self, strictness: Strictness) -> Result<SystemParams> {
        let violations = self.violations(strictness);
        if violations.is_empty() {
            Ok(*self)
        } else {
            Err(Error::InvalidParams(violations))
        }
    }

    /// Probe detuning after the mean-field substitution.
    pub fn shifted_probe_detuning(&self, delta_p: f64) -> f64 {
        delta_p - self.u_bb / 2.0 + self.u_ab
    }

    /// Control detuning after the mean-field substitution.
    pub fn shifted_control_detuning(&self) -> f64 {
        self.delta_mu - self.u_cb / 2.0 + self.u_ab
    }

    /// Same configuration with every tunneling rate and well asymmetry
    /// removed and the whole condensate in the probed well: the ordinary
    /// single-well EIT reference.
    pub fn standard_eit(&self) -> SystemParams {
        SystemParams {
            g_a: 0.0,
            g_b: 0.0,
            g_c: 0.0,
            delta_bb: 0.0,
            delta_cc: 0.0,
            phi_prep: 0.0,
            ..*self
        }
    }
}
