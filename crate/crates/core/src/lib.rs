//! Bifurcation analysis of stationary nested vortex patches.
//!
//! Layers of constant vorticity jump are perturbed with m-fold symmetric
//! boundary modes. The crate locates parameters where the radial state
//! bifurcates, certifies the spectral conditions there, and follows the
//! emerging branches by Newton, arclength continuation, or a smoothed
//! Newton scheme of Nash–Moser type.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod contour;
pub mod error;
pub mod fourier;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
