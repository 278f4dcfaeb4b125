//! Robust joint transmit-beamforming and IRS phase-shift design under
//! bounded user-location uncertainty.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: URA index maps and steering vectors.
//! * [`channel`]: geometric BS→IRS channel, LOS reflection channel, rate.
//! * [`location`]: position-derived angles and the multiplicative location
//!   error model of the reflection channel.
//! * [`quadratic`] and [`trust_region`]: second-order worst-case power model,
//!   its lifted SDP forms, the S-procedure LMI and the exact ball oracle.
//! * [`sdp`]: a small primal-dual interior-point SDP solver with an
//!   independent verifier.
//! * [`optimizer`]: the two relaxed subproblems, Gaussian randomization and
//!   the alternating design loop.
//! * [`baseline`]: the non-robust benchmark.
//! * [`harness`]: scenarios, Monte Carlo evaluation, sweeps and the CLI.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod location;
pub mod optimizer;
pub mod parallel;
pub mod quadratic;
pub mod sdp;
pub mod trust_region;

pub use error::{Error, Result};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

/// Dense complex column vector.
pub type CVector = DVector<Complex64>;
/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;
