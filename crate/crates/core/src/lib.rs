//! Linear probe response of a three-level Λ condensate in a tunnel-coupled
//! double well.

// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dressed;
pub mod error;
pub mod linalg;
pub mod model;
pub mod optics;
pub mod oracle;
pub mod steady;

pub use error::{Error, Result};
pub use model::{RawParams, SystemParams};
