//! Exact arithmetic over small finite fields `F_q` (`q = p^l`, `p <= 101`,
//! `l <= 3`), sparse multivariate polynomials and their rank, varieties
//! `X = {P_i = 0}` with cube calculus, character-sum kernels (bias, `U2`,
//! solution counting), constructive quadratic-form solvers, and the
//! weakly-linear / weakly-quadratic extension pipelines.
//!
//! Everything here is deterministic: sampled operations take explicit seeds,
//! and exact magnitudes are carried as integer residue histograms until a
//! single final floating-point evaluation.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats and the CLI live in
//! the companion `hirank-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bitset;
pub mod error;
pub mod extend_linear;
pub mod extend_quadratic;
pub mod field;
pub mod fourier;
pub mod geometry;
pub mod linalg;
pub mod poly;
pub mod solve;

pub(crate) mod flt;

pub use error::Error;
pub use field::{Field, FqElem};
pub use poly::{MultiPoly, PolyFamily};

/// Shorthand used across the crate.
pub type Result<T> = core::result::Result<T, Error>;
