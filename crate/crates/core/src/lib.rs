//! Equal-deployment optimal contribution selection.
//!
//! Two ways of handling the diversity cone on top of a small mixed-binary
//! LP engine: a lifted polyhedral relaxation ([`lpp`]) and a cutting-plane
//! loop over per-coordinate parabolic cones ([`cdm`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cdm;
pub mod instance;
pub mod linalg;
pub mod lpp;
pub mod milp;
pub mod oracle;
pub mod projection;
pub mod report;
pub mod synth;

#[cfg(not(target_arch = "wasm32"))]
pub(crate) use std::time::Instant;
#[cfg(target_arch = "wasm32")]
pub(crate) use web_time::Instant;

pub use instance::{EdpInstance, InstanceError};
pub use report::{Method, SolveReport, SolveStatus};
