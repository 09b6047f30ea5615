use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{BranchState, Problem};
use crate::contour::{exterior_velocity_sup, total_circulation, Evaluation, Quadrature};
use crate::error::Result;

/// Radii, in units of `b_1`, where the exterior velocity is sampled.
pub const EXTERIOR_RADII: [f64; 3] = [1.5, 2.0, 4.0];
const EXTERIOR_SAMPLES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyTolerances {
    pub residual: f64,
    pub circulation: f64,
    pub exterior_velocity: f64,
    pub symmetry: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances {
            residual: 2e-11,
            circulation: 1e-12,
            exterior_velocity: 1e-6,
            symmetry: 1e-10,
        }
    }
}

impl VerifyTolerances {
    /// Defaults with the residual bound set to twice the Newton tolerance.
    pub fn for_newton_tol(newton_tol: f64) -> Self {
        VerifyTolerances {
            residual: 2.0 * newton_tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    /// `None` for metrics that are reported but not judged.
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Metric {
    fn judged(name: &str, value: f64, tolerance: f64) -> Self {
        Metric {
            name: name.into(),
            value,
            tolerance: Some(tolerance),
            pass: value <= tolerance,
            note: None,
        }
    }

    fn info(name: &str, value: f64) -> Self {
        Metric {
            name: name.into(),
            value,
            tolerance: None,
            pass: true,
            note: None,
        }
    }

    fn failed(name: &str, note: String) -> Self {
        Metric {
            name: name.into(),
            value: 0.0,
            tolerance: None,
            pass: false,
            note: Some(note),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub strict: usize,
    pub n_q: usize,
    pub modes: usize,
    pub metrics: Vec<Metric>,
}

impl VerificationReport {
    pub fn failing(&self) -> Vec<&str> {
        self.metrics
            .iter()
            .filter(|m| !m.pass)
            .map(|m| m.name.as_str())
            .collect()
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

/// Re-checks a state on `strict` times the problem's grid, with up to twice
/// as many output harmonics as were solved for.
///
/// Circulation and exterior velocity are judged only for families that
/// close the circulation; otherwise they are reported for information.
pub fn verify_solution(
    state: &BranchState,
    problem: &Problem,
    strict: usize,
    tol: &VerifyTolerances,
) -> Result<VerificationReport> {
    let strict = strict.max(1);
    let m = problem.fold();
    let n_q = strict * problem.n_q();
    let modes = (2 * problem.truncation()).min(n_q / (2 * m) - 1);
    let mut report = VerificationReport {
        pass: false,
        strict,
        n_q,
        modes,
        metrics: Vec::new(),
    };
    let family = problem.family();
    let system = match family.system(
        m,
        state.theta,
        &state.perturbations,
        Arc::new(Quadrature::new(n_q)?),
    ) {
        Ok(s) => s,
        Err(e) => {
            report.metrics.push(Metric::failed("construction", e.to_string()));
            return Ok(report);
        }
    };

    let residual = Problem::residual_norm(&system.functional_with(Evaluation::Symmetric, modes)?);
    report.metrics.push(Metric::judged("residual", residual, tol.residual));

    let gap = system.min_gap();
    report.metrics.push(Metric {
        name: "min_gap".into(),
        value: gap,
        tolerance: None,
        pass: gap > 0.0,
        note: None,
    });

    report
        .metrics
        .push(Metric::judged("symmetry_defect", system.symmetry_defect(), tol.symmetry));

    let judge = family.zero_circulation();
    let circ = total_circulation(&system).abs();
    report.metrics.push(if judge {
        Metric::judged("circulation", circ, tol.circulation)
    } else {
        Metric::info("circulation", circ)
    });

    let b1 = system.layers()[0].radius;
    for factor in EXTERIOR_RADII {
        let name = format!("exterior_velocity_{factor}");
        let metric = match exterior_velocity_sup(&system, factor * b1, EXTERIOR_SAMPLES) {
            Ok(v) if judge => Metric::judged(&name, v, tol.exterior_velocity),
            Ok(v) => Metric::info(&name, v),
            Err(e) => Metric::failed(&name, e.to_string()),
        };
        report.metrics.push(metric);
    }

    report
        .metrics
        .push(Metric::info("amplitude", problem.amplitude(&state.perturbations)));
    report.pass = report.metrics.iter().all(|m| m.pass);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{three_layer_bifurcation, two_layer_bifurcation, Root};

    #[test]
    fn trivial_states_pass_with_tiny_metrics() {
        let p = three_layer_bifurcation(0.5, -5.0, 2, 10).unwrap();
        let prob = Problem::new(&p, 8, 128).unwrap();
        let st = prob.trivial_state().unwrap();
        let rep = verify_solution(&st, &prob, 2, &VerifyTolerances::default()).unwrap();
        assert!(rep.pass, "{:?}", rep.failing());
        for name in ["residual", "symmetry_defect", "circulation", "exterior_velocity_2"] {
            assert!(rep.metric(name).unwrap().value <= 1e-12, "{name}");
        }
    }

    #[test]
    fn perturbed_state_fails_on_residual() {
        let p = two_layer_bifurcation(0.3, 2, Root::Plus, 10).unwrap();
        let prob = Problem::new(&p, 8, 128).unwrap();
        let mut st = prob.trivial_state().unwrap();
        st.perturbations[0].coeffs_mut()[1] += 1e-3;
        let rep = verify_solution(&st, &prob, 1, &VerifyTolerances::default()).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.failing(), vec!["residual"]);
        assert!(rep.metric("residual").unwrap().value > 1e-4);
    }

    #[test]
    fn crossing_boundaries_are_reported() {
        let p = two_layer_bifurcation(0.3, 2, Root::Plus, 10).unwrap();
        let prob = Problem::new(&p, 8, 128).unwrap();
        let mut st = prob.trivial_state().unwrap();
        st.perturbations[1].coeffs_mut()[0] = 0.9;
        let rep = verify_solution(&st, &prob, 1, &VerifyTolerances::default()).unwrap();
        assert_eq!(rep.failing(), vec!["construction"]);
    }
}
