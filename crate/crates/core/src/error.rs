use std::fmt;

use crate::steady::Branch;

/// A single violated parameter invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    NonPositiveRate { field: &'static str, value: f64 },
    NegativeRate { field: &'static str, value: f64 },
    NonFinite { field: &'static str },
    Missing { field: &'static str },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveRate { field, value } => {
                write!(f, "{field} must be > 0 (got {value})")
            }
            Violation::NegativeRate { field, value } => {
                write!(f, "{field} must be >= 0 (got {value})")
            }
            Violation::NonFinite { field } => write!(f, "{field} is not finite"),
            Violation::Missing { field } => write!(f, "{field} is required"),
        }
    }
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<Violation>),

    #[error(
        "mixing angle undefined for the {subspace} subspace: asymmetry and tunneling are both zero"
    )]
    DegenerateSubspace { subspace: &'static str },

    #[error("singular linear system (pivot magnitude {pivot:e})")]
    SingularSystem { pivot: f64 },

    #[error("pole in the {branch} branch denominator at delta_p = {delta_p}")]
    PoleEncountered { branch: Branch, delta_p: f64 },

    #[error("symmetric-well formula needs delta_bb = delta_cc = 0 and g_b > 0")]
    NotDegenerate,

    #[error("Re chi = {re_chi} < -1 has no real refractive index")]
    UnphysicalIndex { re_chi: f64 },

    #[error("finite-difference step {h:e} too large: estimates {coarse:e} and {fine:e} disagree")]
    StepTooLarge { h: f64, coarse: f64, fine: f64 },

    #[error("feature at {center:e} unresolved: grid spacing {spacing:e} exceeds {required:e}")]
    UnresolvedFeature {
        center: f64,
        spacing: f64,
        required: f64,
    },

    #[error("integration unstable at step {step} (residual {residual:e} growing)")]
    StepUnstable { step: usize, residual: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
