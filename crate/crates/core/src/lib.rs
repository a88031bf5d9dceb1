//! Forced symmetry breaking of rotating waves on the sphere.
//!
//! A system equivariant under SO(3) is perturbed so that only the rotations
//! about one axis `Q` survive. The reduced dynamics live on SO(3); dividing
//! out the surviving circle leaves a flow on the unit sphere whose
//! equilibria and periodic orbits are the rotating and modulated rotating
//! waves of the perturbed system.
//!
//! Modules, bottom up:
//!
//! - [`liegroup`]: hat/vee, exp/log, frames.
//! - [`fields`]: polynomial perturbation fields.
//! - [`flows`]: the group flow, the sphere flow and the angle chart.
//! - [`analysis`]: equilibria near the poles, the persistence integral,
//!   the return map and persistent periodic orbits, a limit-set survey.
//! - [`reconstruct`]: lifting back to rotating and modulated waves.
//! - [`cli`]: config parsing, the pipeline and its report.

// `!(x > a)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod fields;
pub mod flows;
pub mod liegroup;
pub mod reconstruct;

pub use error::{Error, Result};
pub use fields::{PerturbationField, Polynomial, SphericalPoint};
pub use flows::{Scenario, Tolerances, Trajectory};
pub use liegroup::{exp_so3, frame_to_pole, hat, log_so3, vee, AlgebraElement, Rotation, UnitVector};
