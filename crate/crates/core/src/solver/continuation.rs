use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::nash_moser::nash_moser_from;
use super::newton::{is_geometric, newton_core, weighted, Constraint, NewtonOutcome};
use super::{BranchState, ContinuationConfig, Problem, SolverMode};
use crate::error::{Error, Result};
use crate::spectral::BifurcationPoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxSteps,
    NestingFailure,
    SolverFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum BranchEvent {
    /// `det [G_X; e_Θ]` changed sign between states `step - 1` and `step`,
    /// so `Θ` turned around.
    Fold { step: usize, theta: f64 },
    /// The branch came back within `ds` of the radial state.
    ReEntry { step: usize, norm: f64 },
    /// A step failed with `ds`; the step is retried with `ds / 2` or the
    /// branch ends.
    StepError {
        step: usize,
        ds: f64,
        code: String,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub states: Vec<BranchState>,
    pub stop: StopReason,
    pub events: Vec<BranchEvent>,
}

impl Branch {
    pub fn max_amplitude(&self) -> f64 {
        self.states.iter().map(|s| s.amplitude.abs()).fold(0.0, f64::max)
    }
}

/// Sign of `det [G_X; e_Θᵀ]`, read off the LU factors so large systems
/// cannot overflow.
fn fold_sign(gx: &DMatrix<f64>) -> f64 {
    let n = gx.ncols();
    let mut a = gx.clone().insert_row(gx.nrows(), 0.0);
    a[(n - 1, 0)] = 1.0;
    let lu = a.lu();
    let mut sign = lu.p().determinant::<f64>();
    for v in lu.u().diagonal().iter() {
        if *v == 0.0 {
            return 0.0;
        }
        sign *= v.signum();
    }
    sign
}

fn norm_w(x: &[f64]) -> f64 {
    weighted(x).iter().zip(x).map(|(a, b)| a * b).sum::<f64>().sqrt()
}

/// Pseudo-arclength continuation from a certified bifurcation point.
///
/// The first state solves the amplitude problem at `s = ds` from `(Θ*, ds v)`;
/// the mirror symmetry `s ↦ -s` of the branch means `Θ` is stationary at
/// `s = 0`, so the predictor moves `R` only. Later steps use the secant
/// through the two previous states and an arclength condition.
pub fn continue_branch(start: &BifurcationPoint, config: &ContinuationConfig) -> Result<Branch> {
    config.validate()?;
    let problem = Problem::new(start, config.truncation, config.quadrature)?;
    match config.mode {
        SolverMode::Newton => arclength(&problem, config),
        SolverMode::NashMoser => natural(&problem, config),
    }
}

fn step_error(step: usize, ds: f64, e: &Error) -> BranchEvent {
    BranchEvent::StepError {
        step,
        ds,
        code: e.code().to_string(),
        message: e.to_string(),
    }
}

fn stop_for(e: &Error) -> StopReason {
    if is_geometric(e) {
        StopReason::NestingFailure
    } else {
        StopReason::SolverFailure
    }
}

fn arclength(problem: &Problem, config: &ContinuationConfig) -> Result<Branch> {
    let mut states = Vec::new();
    let mut events = Vec::new();
    let ds = config.ds;

    let first = newton_core(
        problem,
        problem.predictor(ds),
        &Constraint::amplitude(problem, ds),
        config,
    );
    let first = match first {
        Ok(out) => out,
        Err(e) => {
            events.push(step_error(1, ds, &e));
            return Ok(Branch {
                states,
                stop: stop_for(&e),
                events,
            });
        }
    };
    let push = |out: &NewtonOutcome, states: &mut Vec<BranchState>| -> Result<()> {
        let (theta, r) = problem.unpack(&out.x);
        states.push(problem.state(theta, r, out.iterations)?);
        Ok(())
    };
    push(&first, &mut states)?;

    let mut prev = problem.pack(problem.theta_star(), &[]);
    prev.resize(problem.dim(), 0.0);
    let mut cur = first.x.clone();
    let mut sign = first.jacobian.as_ref().map(fold_sign);

    for step in 2..=config.max_steps {
        let diff: Vec<f64> = cur.iter().zip(&prev).map(|(a, b)| a - b).collect();
        let len = norm_w(&diff);
        let tangent: Vec<f64> = diff.iter().map(|d| d / len).collect();

        let mut h = ds;
        let mut outcome = None;
        let mut last_err = None;
        for _ in 0..=config.max_halvings {
            let pred: Vec<f64> = cur.iter().zip(&tangent).map(|(c, t)| c + h * t).collect();
            let c = Constraint::arclength(&cur, &tangent, h);
            match newton_core(problem, pred, &c, config) {
                Ok(out) => {
                    outcome = Some(out);
                    break;
                }
                Err(e) => {
                    events.push(step_error(step, h, &e));
                    last_err = Some(e);
                    h *= 0.5;
                }
            }
        }
        let Some(out) = outcome else {
            let e = last_err.expect("a failed step records its error");
            return Ok(Branch {
                states,
                stop: stop_for(&e),
                events,
            });
        };

        if let (Some(old), Some(gx)) = (sign, out.jacobian.as_ref()) {
            let new = fold_sign(gx);
            if new != 0.0 && old != 0.0 && new != old {
                events.push(BranchEvent::Fold {
                    step,
                    theta: out.x[0],
                });
            }
            sign = Some(new);
        }
        push(&out, &mut states)?;
        let norm = states.last().expect("just pushed").perturbation_norm();
        if step > 2 && norm < ds {
            events.push(BranchEvent::ReEntry { step, norm });
        }
        prev = std::mem::replace(&mut cur, out.x);
    }
    Ok(Branch {
        states,
        stop: StopReason::MaxSteps,
        events,
    })
}

/// Stepping in `s` with the Nash–Moser corrector, warm-started from the
/// previous state.
fn natural(problem: &Problem, config: &ContinuationConfig) -> Result<Branch> {
    let mut states: Vec<BranchState> = Vec::new();
    let mut events = Vec::new();
    let mut warm = None;
    for step in 1..=config.max_steps {
        let s = step as f64 * config.ds;
        match nash_moser_from(problem, s, warm.as_deref(), config) {
            Ok((state, _trace, r_tilde)) => {
                states.push(state);
                warm = Some(r_tilde);
            }
            Err(e) => {
                events.push(step_error(step, config.ds, &e));
                return Ok(Branch {
                    states,
                    stop: stop_for(&e),
                    events,
                });
            }
        }
    }
    Ok(Branch {
        states,
        stop: StopReason::MaxSteps,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::newton_solve;
    use crate::spectral::{two_layer_bifurcation, Root};

    fn cfg() -> ContinuationConfig {
        ContinuationConfig {
            truncation: 8,
            quadrature: 128,
            ds: 2e-3,
            max_steps: 4,
            ..Default::default()
        }
    }

    #[test]
    fn first_state_matches_newton_solve() {
        let p = two_layer_bifurcation(0.3, 2, Root::Plus, 10).unwrap();
        let c = cfg();
        let branch = continue_branch(&p, &c).unwrap();
        assert_eq!(branch.stop, StopReason::MaxSteps);
        assert_eq!(branch.states.len(), 4);
        let prob = Problem::new(&p, c.truncation, c.quadrature).unwrap();
        let (t0, r0) = prob.unpack(&prob.predictor(c.ds));
        let direct = newton_solve(&prob, t0, &r0, c.ds, &c).unwrap();
        assert_eq!(branch.states[0], direct);
        for st in &branch.states {
            assert!(st.residual < 2.0 * c.newton_tol);
        }
        // Steps are ds apart in the weighted norm.
        for w in branch.states.windows(2) {
            let a = prob.pack(w[0].theta, &w[0].perturbations);
            let b = prob.pack(w[1].theta, &w[1].perturbations);
            let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            assert!(norm_w(&d) <= 1.01 * c.ds);
        }
    }

    #[test]
    fn runs_are_bitwise_reproducible() {
        let p = two_layer_bifurcation(0.3, 2, Root::Minus, 10).unwrap();
        let a = continue_branch(&p, &cfg()).unwrap();
        let b = continue_branch(&p, &cfg()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fold_sign_of_known_matrix() {
        let gx = DMatrix::from_row_slice(1, 2, &[0.0, -3.0]);
        assert_eq!(fold_sign(&gx), 1.0);
        let gx = DMatrix::from_row_slice(1, 2, &[0.0, 3.0]);
        assert_eq!(fold_sign(&gx), -1.0);
    }
}
