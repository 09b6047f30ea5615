use nalgebra::{DMatrix, DVector};

use super::{BranchState, ContinuationConfig, Problem};
use crate::error::{Error, Result};

/// Largest accepted condition estimate of the bordered Jacobian.
pub(crate) const MAX_CONDITION: f64 = 1e14;
/// Tolerance on the scalar constraint.
pub(crate) const CONSTRAINT_TOL: f64 = 1e-12;

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1.0 / (1u64 << 20) as f64;

/// Linear scalar condition `row · x = target` closing the square system.
#[derive(Clone, Debug)]
pub(crate) struct Constraint {
    pub row: Vec<f64>,
    pub target: f64,
}

impl Constraint {
    /// `⟨v, R⟩ = s`.
    pub fn amplitude(problem: &Problem, s: f64) -> Self {
        let mut row = problem.kernel_vector();
        for c in &mut row[1..] {
            *c *= std::f64::consts::PI;
        }
        Constraint { row, target: s }
    }

    /// `⟨t, x - base⟩_W = ds` with `W` the L² weights on coefficients.
    pub fn arclength(base: &[f64], tangent: &[f64], ds: f64) -> Self {
        let row: Vec<f64> = weighted(tangent);
        let target = dot(&row, base) + ds;
        Constraint { row, target }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.row, x) - self.target
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Applies the state-space weights: 1 on `Θ`, π on coefficients.
pub(crate) fn weighted(x: &[f64]) -> Vec<f64> {
    let mut w = x.to_vec();
    for c in &mut w[1..] {
        *c *= std::f64::consts::PI;
    }
    w
}

pub(crate) fn is_geometric(e: &Error) -> bool {
    matches!(
        e,
        Error::NestingViolation { .. } | Error::NotNested { .. } | Error::NegativeRadicand(_)
    )
}

#[derive(Clone, Debug)]
pub(crate) struct NewtonOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Last functional Jacobian `G_X`, if one was formed.
    pub jacobian: Option<DMatrix<f64>>,
}

/// Least-squares solve through the SVD, refusing ill-conditioned systems.
pub(crate) fn svd_solve(a: DMatrix<f64>, b: &DVector<f64>) -> std::result::Result<DVector<f64>, f64> {
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let (max, min) = (sv.max(), sv.min());
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(condition);
    }
    Ok(svd.solve(b, 0.0).expect("factors were requested"))
}

struct Eval {
    g: Vec<f64>,
    residual: f64,
    constraint: f64,
    merit: f64,
}

fn evaluate(problem: &Problem, c: &Constraint, x: &[f64]) -> Result<Eval> {
    let g = problem.functional_vec(x)?;
    let j = problem.truncation();
    let residual = g
        .chunks(j)
        .map(|s| (std::f64::consts::PI * s.iter().map(|v| v * v).sum::<f64>()).sqrt())
        .fold(0.0, f64::max);
    let constraint = c.value(x);
    let merit = (g.iter().map(|v| v * v).sum::<f64>() + constraint * constraint).sqrt();
    Ok(Eval {
        g,
        residual,
        constraint,
        merit,
    })
}

/// Damped Newton on `(G(X), c(X)) = 0`.
pub(crate) fn newton_core(
    problem: &Problem,
    x0: Vec<f64>,
    c: &Constraint,
    config: &ContinuationConfig,
) -> Result<NewtonOutcome> {
    let mut x = x0;
    let mut cur = evaluate(problem, c, &x)?;
    let mut jacobian = None;
    for it in 0..=config.max_newton_iters {
        if cur.residual < config.newton_tol && cur.constraint.abs() <= CONSTRAINT_TOL {
            return Ok(NewtonOutcome {
                x,
                iterations: it,
                jacobian,
            });
        }
        if it == config.max_newton_iters {
            break;
        }
        let gx = problem.jacobian(&x, config.fd_step)?;
        let n = x.len();
        let mut a = gx.clone().insert_row(gx.nrows(), 0.0);
        for (k, v) in c.row.iter().enumerate() {
            a[(n - 1, k)] = *v;
        }
        let mut rhs = DVector::from_vec(cur.g.clone());
        rhs = rhs.push(cur.constraint);
        let d = svd_solve(a, &(-rhs)).map_err(|condition| Error::SingularJacobian { condition })?;
        jacobian = Some(gx);

        let mut alpha = 1.0;
        let mut geometric_only = true;
        loop {
            let trial: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + alpha * b).collect();
            match evaluate(problem, c, &trial) {
                Ok(e) if e.merit <= (1.0 - ARMIJO * alpha) * cur.merit => {
                    x = trial;
                    cur = e;
                    break;
                }
                Ok(_) => geometric_only = false,
                Err(e) if is_geometric(&e) => {}
                Err(e) => return Err(e),
            }
            alpha *= 0.5;
            if alpha < MIN_STEP {
                if geometric_only {
                    // Every trial step broke nesting; report it from the full step.
                    let full: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + b).collect();
                    let (theta, r) = problem.unpack(&full);
                    return Err(problem
                        .system(theta, &r)
                        .err()
                        .unwrap_or(Error::NoConvergence {
                            iterations: it + 1,
                            residual: cur.residual,
                        }));
                }
                return Err(Error::NoConvergence {
                    iterations: it + 1,
                    residual: cur.residual,
                });
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: config.max_newton_iters,
        residual: cur.residual,
    })
}

/// Solves `G(Θ, R) = 0`, `⟨v, R⟩ = s` by damped Newton from `(Θ_init, R_init)`.
pub fn newton_solve(
    problem: &Problem,
    theta_init: f64,
    r_init: &[crate::fourier::FourierEvenSeries],
    s: f64,
    config: &ContinuationConfig,
) -> Result<BranchState> {
    config.validate()?;
    if r_init.len() != problem.n_layers() {
        return Err(Error::Domain(format!(
            "expected {} perturbations, got {}",
            problem.n_layers(),
            r_init.len()
        )));
    }
    if s == 0.0 {
        return problem.trivial_state();
    }
    let c = Constraint::amplitude(problem, s);
    let out = newton_core(problem, problem.pack(theta_init, r_init), &c, config)?;
    let (theta, r) = problem.unpack(&out.x);
    problem.state(theta, r, out.iterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierEvenSeries;
    use crate::spectral::{two_layer_bifurcation, Root};

    fn small_config() -> ContinuationConfig {
        ContinuationConfig {
            truncation: 8,
            quadrature: 128,
            ..Default::default()
        }
    }

    #[test]
    fn zero_amplitude_returns_trivial_state() {
        let p = two_layer_bifurcation(0.3, 2, Root::Plus, 10).unwrap();
        let cfg = small_config();
        let prob = Problem::new(&p, cfg.truncation, cfg.quadrature).unwrap();
        let zeros = vec![FourierEvenSeries::zeros(2, 8); 2];
        let st = newton_solve(&prob, p.theta, &zeros, 0.0, &cfg).unwrap();
        assert_eq!(st.iterations, 0);
        assert_eq!(st.theta, p.theta);
        assert!(st.residual < 1e-15);
    }

    #[test]
    fn converges_from_kernel_predictor() {
        for root in [Root::Minus, Root::Plus] {
            let p = two_layer_bifurcation(0.3, 2, root, 10).unwrap();
            let cfg = small_config();
            let prob = Problem::new(&p, cfg.truncation, cfg.quadrature).unwrap();
            let s = 1e-3;
            let (theta0, r0) = prob.unpack(&prob.predictor(s));
            let st = newton_solve(&prob, theta0, &r0, s, &cfg).unwrap();
            assert!(st.iterations <= 6, "{} iterations", st.iterations);
            assert!(st.residual < 1e-11);
            assert!((st.amplitude - s).abs() < 1e-12);
            // Pitchfork: Θ moves at second order in s.
            assert!((st.theta - p.theta).abs() < 10.0 * s);
            assert!((st.perturbation_norm() / s - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn amplitude_constraint_row_matches_inner_product() {
        let p = two_layer_bifurcation(0.3, 2, Root::Plus, 10).unwrap();
        let prob = Problem::new(&p, 4, 64).unwrap();
        let c = Constraint::amplitude(&prob, 0.0);
        let r = vec![
            FourierEvenSeries::new(2, vec![0.1, 0.2, 0.0, 0.3]),
            FourierEvenSeries::new(2, vec![-0.4, 0.0, 0.5, 0.0]),
        ];
        let x = prob.pack(1.0, &r);
        assert!((c.value(&x) - prob.amplitude(&r)).abs() < 1e-15);
    }
}
