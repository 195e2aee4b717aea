//! Experiment driver for the `schwarz-lfa` library: LFA sweeps, measured
//! multigrid convergence and the verification suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiments;
pub mod oracle;
pub mod params;
pub mod verify;
