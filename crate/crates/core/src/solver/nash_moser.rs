use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::newton::svd_solve;
use super::{BranchState, ContinuationConfig, Problem};
use crate::contour::PatchSystem;
use crate::error::{Error, Result};
use crate::fourier::{tuple_norm, FourierEvenSeries, FourierOddSeries, NormSpec};
use crate::spectral::BifurcationPoint;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NashMoserRecord {
    pub iteration: usize,
    /// Cutoff frequency `N_n` of the smoothing applied to the update.
    pub cutoff: f64,
    /// `‖R_{n+1} - R_n‖` in the order-`k` norm.
    pub a: f64,
    /// `‖G̃_s(R_n)‖` in the order-`k` norm.
    pub b: f64,
    /// `‖R_n‖` in the order-`k + β` norm.
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NashMoserTrace {
    pub records: Vec<NashMoserRecord>,
    /// `‖G̃_s‖` at the returned iterate.
    pub final_b: f64,
}

/// Lifts `R̃` to `(Θ* + ⟨v, R̃⟩, s v + (I - P) R̃)`.
fn lift(problem: &Problem, s: f64, rt: &[f64]) -> (f64, Vec<FourierEvenSeries>) {
    let kv = &problem.kernel_vector()[1..];
    let along = PI * kv.iter().zip(rt).map(|(a, b)| a * b).sum::<f64>();
    let mut x = Vec::with_capacity(problem.dim());
    x.push(problem.theta_star() + along);
    x.extend(kv.iter().zip(rt).map(|(v, r)| (s - along) * v + r));
    problem.unpack(&x)
}

/// `G̃_s(R̃) = G(Θ* + ⟨v, R̃⟩, s v + (I - P) R̃)` for a flattened `R̃`.
pub fn tilde_functional(problem: &Problem, s: f64, r_tilde: &[f64]) -> Result<Vec<FourierOddSeries>> {
    if r_tilde.len() + 1 != problem.dim() {
        return Err(Error::Domain(format!(
            "R̃ has {} entries, expected {}",
            r_tilde.len(),
            problem.dim() - 1
        )));
    }
    let (theta, r) = lift(problem, s, r_tilde);
    problem.functional(theta, &r)
}

/// The part `h ↦ h_1' u_1^θ` of `D_R G`, which vanishes at the radial state
/// when the total circulation is zero. Everything else forms `A`.
fn transport_part(problem: &Problem, system: &PatchSystem) -> DMatrix<f64> {
    let p = problem.n_layers();
    let j = problem.truncation();
    let m = problem.fold();
    let q = problem.quadrature();
    let n = q.len();
    let half = n / (2 * m);
    let sin = q.sin_table();
    let u: Vec<f64> = (1..half).map(|k| system.layer_velocity_at(0, k).0).collect();
    let mut a = DMatrix::zeros(p * j, p * j);
    for col in 0..j {
        let f_in = (col + 1) * m;
        let vals: Vec<f64> = u
            .iter()
            .enumerate()
            .map(|(i, uk)| -(f_in as f64) * sin[(f_in * (i + 1)) % n] * uk)
            .collect();
        for row in 0..j {
            let f_out = (row + 1) * m;
            let s: f64 = vals
                .iter()
                .enumerate()
                .map(|(i, v)| v * sin[(f_out * (i + 1)) % n])
                .sum();
            a[(row, col)] = 4.0 * m as f64 * s / n as f64;
        }
    }
    a
}

fn smooth(problem: &Problem, d: &DVector<f64>, cutoff: f64) -> Vec<f64> {
    let j = problem.truncation();
    let m = problem.fold() as f64;
    d.iter()
        .enumerate()
        .map(|(i, v)| if ((i % j + 1) as f64) * m <= cutoff { *v } else { 0.0 })
        .collect()
}

fn even_norm(problem: &Problem, v: &[f64], spec: &NormSpec) -> f64 {
    let (_, r) = problem.unpack(&[&[0.0][..], v].concat());
    tuple_norm(&r, spec)
}

fn odd_norm(g: &[FourierOddSeries], spec: &NormSpec) -> f64 {
    tuple_norm(g, spec)
}

/// Smoothed Newton iteration `R_{n+1} = R_n - S(N_n) T_s(R_n)^{-1} G̃_s(R_n)`
/// from `R_0 = 0`, where `T_s h = ∂_Θ G ⟨v, h⟩ + A (I - P) h`.
pub fn nash_moser_solve(
    start: &BifurcationPoint,
    s: f64,
    config: &ContinuationConfig,
) -> Result<(BranchState, NashMoserTrace)> {
    config.validate()?;
    let problem = Problem::new(start, config.truncation, config.quadrature)?;
    let (state, trace, _) = nash_moser_from(&problem, s, None, config)?;
    Ok((state, trace))
}

/// As [`nash_moser_solve`] on a prepared problem, optionally starting from
/// a previous `R̃`. Also returns the final `R̃`.
pub(crate) fn nash_moser_from(
    problem: &Problem,
    s: f64,
    warm: Option<&[f64]>,
    config: &ContinuationConfig,
) -> Result<(BranchState, NashMoserTrace, Vec<f64>)> {
    config.validate()?;
    let nm = &config.nash_moser;
    let pj = problem.dim() - 1;
    let mut rt = warm.map_or_else(|| vec![0.0; pj], <[f64]>::to_vec);
    if rt.len() != pj {
        return Err(Error::Domain(format!("warm start has {} entries, expected {pj}", rt.len())));
    }
    let k = NormSpec::sobolev(nm.sobolev_order);
    let kb = NormSpec::sobolev(nm.sobolev_order + nm.beta);
    let n0 = nm.initial_cutoff.unwrap_or(2.0 * problem.fold() as f64);
    let kv = DVector::from_column_slice(&problem.kernel_vector()[1..]);
    let kw = &kv * PI;

    let mut records = Vec::new();
    for it in 0..=nm.max_iters {
        let (theta, r) = lift(problem, s, &rt);
        let system = problem.system(theta, &r)?;
        let g = system.functional()?;
        let b = odd_norm(&g, &k);
        if Problem::residual_norm(&g) < config.newton_tol {
            let state = problem.state(theta, r, it)?;
            return Ok((state, NashMoserTrace { records, final_b: b }, rt));
        }
        if it == nm.max_iters {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: Problem::residual_norm(&g),
            });
        }
        let x = problem.pack(theta, &r);
        let jx = problem.jacobian(&x, config.fd_step)?;
        let d_theta = jx.column(0).clone_owned();
        let a_op = jx.columns(1, pj) - transport_part(problem, &system);
        let complement = DMatrix::identity(pj, pj) - &kv * kw.transpose();
        let t = &d_theta * kw.transpose() + a_op * complement;
        let rhs = DVector::from_vec(g.iter().flat_map(|s| s.coeffs().to_vec()).collect());
        let delta = svd_solve(t, &rhs).map_err(|condition| Error::TsSingular { condition })?;
        let cutoff = n0 * nm.growth.powi(it as i32);
        let step = smooth(problem, &delta, cutoff);
        records.push(NashMoserRecord {
            iteration: it,
            cutoff,
            a: even_norm(problem, &step, &k),
            b,
            c: even_norm(problem, &rt, &kb),
        });
        for (r, d) in rt.iter_mut().zip(&step) {
            *r -= d;
        }
    }
    unreachable!("the loop returns on its last iteration")
}
