//! Branches of non-radial stationary states emanating from a certified
//! bifurcation point.
//!
//! Unknowns are `X = (Θ, R_1, …, R_p)` with `J` cosine coefficients per
//! layer. The functional is projected onto the first `J` sine harmonics,
//! and one scalar condition closes the system: the amplitude
//! `⟨v, R⟩ = s` along the unit kernel `v`, or an arclength condition during
//! continuation.

use serde::{Deserialize, Serialize};

use crate::contour::LayerConfig;
use crate::error::{Error, Result};
use crate::fourier::FourierEvenSeries;

mod continuation;
mod nash_moser;
mod newton;
mod problem;
mod verify;

pub use continuation::{continue_branch, Branch, BranchEvent, StopReason};
pub use nash_moser::{nash_moser_solve, tilde_functional, NashMoserRecord, NashMoserTrace};
pub use newton::newton_solve;
pub use problem::Problem;
pub use verify::{verify_solution, Metric, VerificationReport, VerifyTolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    Newton,
    NashMoser,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NashMoserConfig {
    /// Initial cutoff frequency; `None` means `2m`.
    pub initial_cutoff: Option<f64>,
    pub growth: f64,
    pub max_iters: usize,
    /// Sobolev order `k` of the norms used for `a_n` and `b_n`.
    pub sobolev_order: u32,
    /// Extra smoothness `β` of the proxy `C_n`.
    pub beta: u32,
}

impl Default for NashMoserConfig {
    fn default() -> Self {
        NashMoserConfig {
            initial_cutoff: None,
            growth: 1.5,
            max_iters: 40,
            sobolev_order: 2,
            beta: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationConfig {
    pub ds: f64,
    pub max_steps: usize,
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Cosine modes per layer.
    pub truncation: usize,
    /// Quadrature nodes.
    pub quadrature: usize,
    pub mode: SolverMode,
    /// Relative finite-difference step for Jacobian columns.
    pub fd_step: f64,
    /// Step halvings allowed after a failed continuation step.
    pub max_halvings: usize,
    pub nash_moser: NashMoserConfig,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            ds: 1e-3,
            max_steps: 20,
            newton_tol: 1e-11,
            max_newton_iters: 12,
            truncation: 32,
            quadrature: 512,
            mode: SolverMode::Newton,
            fd_step: 1e-6,
            max_halvings: 2,
            nash_moser: NashMoserConfig::default(),
        }
    }
}

impl ContinuationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.ds > 0.0 && self.ds.is_finite()) {
            return bad(format!("ds must be positive, got {}", self.ds));
        }
        if !(self.newton_tol > 0.0) {
            return bad(format!("newton_tol must be positive, got {}", self.newton_tol));
        }
        if !(self.fd_step > 0.0 && self.fd_step < 1e-2) {
            return bad(format!("fd_step must lie in (0, 1e-2), got {}", self.fd_step));
        }
        if self.max_newton_iters == 0 || self.truncation == 0 {
            return bad("max_newton_iters and truncation must be positive".into());
        }
        let nm = &self.nash_moser;
        if !(nm.growth > 1.0) || nm.max_iters == 0 {
            return bad("nash_moser.growth must exceed 1 and max_iters be positive".into());
        }
        if let Some(c) = nm.initial_cutoff {
            if !(c > 0.0) {
                return bad(format!("nash_moser.initial_cutoff must be positive, got {c}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub circulation: f64,
    /// Largest speed on the circle of radius `2 b_1`.
    pub exterior_velocity_sup: f64,
    pub min_gap: f64,
}

/// A converged point of a branch. `residual` and `diagnostics` are
/// recomputed from the stored perturbations after the solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchState {
    /// `⟨v, R⟩`.
    pub amplitude: f64,
    pub theta: f64,
    pub layers: Vec<LayerConfig>,
    pub perturbations: Vec<FourierEvenSeries>,
    /// Largest L² norm among the functional components.
    pub residual: f64,
    pub iterations: usize,
    pub diagnostics: Diagnostics,
}

impl BranchState {
    /// L² norm of the whole perturbation tuple.
    pub fn perturbation_norm(&self) -> f64 {
        self.perturbations
            .iter()
            .map(|r| r.dot(r))
            .sum::<f64>()
            .sqrt()
    }
}
