//! Simulation and analysis of concatenated GKP / Steane continuous-variable
//! error correction.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod decoder;
pub mod error;
pub mod gkp;
pub mod gkp_analytics;
pub mod phase_space;
pub mod quadrature;
pub mod report;
pub mod simulator;
pub mod special;
pub mod steane;
pub mod verify;

pub use error::{Error, Result};
pub use phase_space::{Quadrature, Squeezing, CODE_SIZE, LATTICE_SPACING, SQRT_PI};
