//! Geometric multigrid with overlapping multiplicative Schwarz smoothers for
//! two-dimensional rotated anisotropic diffusion, plus a local Fourier
//! analysis engine for the same smoothers and closed-form small-ε results.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
// NaN must fail the positivity checks, and dense kernels read best indexed
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod assembly;
pub mod error;
pub mod lfa;
pub mod linalg;
pub mod model;
pub mod multigrid;
pub mod schwarz;
pub mod theory;
pub mod transfer;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
