use std::sync::Arc;

use nalgebra::DMatrix;

use super::{BranchState, Diagnostics};
use crate::contour::{exterior_velocity_sup, total_circulation, Family, PatchSystem, Quadrature};
use crate::error::{Error, Result};
use crate::fourier::{inner_product, FourierEvenSeries, FourierOddSeries};
use crate::spectral::{jacobian_fd, BifurcationPoint};

const EXTERIOR_SAMPLES: usize = 64;

/// Discretized functional around one bifurcation point.
#[derive(Clone, Debug)]
pub struct Problem {
    family: Family,
    fold: usize,
    truncation: usize,
    quad: Arc<Quadrature>,
    theta_star: f64,
    kernel: Vec<FourierEvenSeries>,
}

impl Problem {
    pub fn new(point: &BifurcationPoint, truncation: usize, n_q: usize) -> Result<Self> {
        let m = point.fold;
        if truncation == 0 {
            return Err(Error::Domain("truncation must be positive".into()));
        }
        if !n_q.is_multiple_of(2 * m) || 2 * truncation * m >= n_q {
            return Err(Error::QuadratureUnderresolved(format!(
                "{n_q} nodes cannot carry {truncation} modes of fold {m} \
                 (need a multiple of 2m above 2Jm)"
            )));
        }
        Ok(Problem {
            family: point.family,
            fold: m,
            truncation,
            quad: Arc::new(Quadrature::new(n_q)?),
            theta_star: point.theta,
            kernel: point.kernel_series(truncation),
        })
    }

    /// Same problem on a different grid and truncation.
    pub fn refined(&self, truncation: usize, n_q: usize) -> Result<Self> {
        let m = self.fold;
        if !n_q.is_multiple_of(2 * m) || 2 * truncation * m >= n_q {
            return Err(Error::QuadratureUnderresolved(format!(
                "{n_q} nodes cannot carry {truncation} modes of fold {m}"
            )));
        }
        Ok(Problem {
            quad: Arc::new(Quadrature::new(n_q)?),
            truncation,
            kernel: self.kernel.iter().map(|v| v.resized(truncation)).collect(),
            ..self.clone()
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn fold(&self) -> usize {
        self.fold
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn n_q(&self) -> usize {
        self.quad.len()
    }

    pub fn quadrature(&self) -> &Arc<Quadrature> {
        &self.quad
    }

    pub fn theta_star(&self) -> f64 {
        self.theta_star
    }

    /// Unit-L² kernel direction `v`.
    pub fn kernel(&self) -> &[FourierEvenSeries] {
        &self.kernel
    }

    pub fn n_layers(&self) -> usize {
        self.family.n_layers()
    }

    /// Length of `X = (Θ, R)`.
    pub fn dim(&self) -> usize {
        1 + self.n_layers() * self.truncation
    }

    pub fn pack(&self, theta: f64, r: &[FourierEvenSeries]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        x.push(theta);
        for s in r {
            x.extend(s.resized(self.truncation).coeffs());
        }
        x
    }

    pub fn unpack(&self, x: &[f64]) -> (f64, Vec<FourierEvenSeries>) {
        let r = x[1..]
            .chunks(self.truncation)
            .map(|c| FourierEvenSeries::new(self.fold, c.to_vec()))
            .collect();
        (x[0], r)
    }

    /// Packed kernel `(0, v)`.
    pub fn kernel_vector(&self) -> Vec<f64> {
        self.pack(0.0, &self.kernel)
    }

    pub fn amplitude(&self, r: &[FourierEvenSeries]) -> f64 {
        let r: Vec<_> = r.iter().map(|s| s.resized(self.truncation)).collect();
        inner_product(&self.kernel, &r)
    }

    pub fn system(&self, theta: f64, r: &[FourierEvenSeries]) -> Result<PatchSystem> {
        self.family.system(self.fold, theta, r, self.quad.clone())
    }

    pub fn functional(&self, theta: f64, r: &[FourierEvenSeries]) -> Result<Vec<FourierOddSeries>> {
        self.system(theta, r)?.functional()
    }

    /// Functional coefficients flattened layer by layer.
    pub fn functional_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (theta, r) = self.unpack(x);
        Ok(self
            .functional(theta, &r)?
            .into_iter()
            .flat_map(|s| s.into_coeffs())
            .collect())
    }

    /// Finite-difference Jacobian of [`Problem::functional_vec`].
    pub fn jacobian(&self, x: &[f64], h_rel: f64) -> Result<DMatrix<f64>> {
        jacobian_fd(|y| self.functional_vec(y), x, h_rel)
    }

    /// Largest L² norm among the components.
    pub fn residual_norm(g: &[FourierOddSeries]) -> f64 {
        g.iter().map(|s| s.l2_norm()).fold(0.0, f64::max)
    }

    /// Builds a state, recomputing the residual and diagnostics.
    pub fn state(&self, theta: f64, r: Vec<FourierEvenSeries>, iterations: usize) -> Result<BranchState> {
        let system = self.system(theta, &r)?;
        let residual = Self::residual_norm(&system.functional()?);
        let b1 = system.layers()[0].radius;
        let diagnostics = Diagnostics {
            circulation: total_circulation(&system),
            exterior_velocity_sup: exterior_velocity_sup(&system, 2.0 * b1, EXTERIOR_SAMPLES)?,
            min_gap: system.min_gap(),
        };
        Ok(BranchState {
            amplitude: self.amplitude(&r),
            theta,
            layers: system.layers().to_vec(),
            perturbations: r,
            residual,
            iterations,
            diagnostics,
        })
    }

    pub fn trivial_state(&self) -> Result<BranchState> {
        let zeros = vec![FourierEvenSeries::zeros(self.fold, self.truncation); self.n_layers()];
        self.state(self.theta_star, zeros, 0)
    }

    /// Predictor `(Θ*, s v)`.
    pub fn predictor(&self, s: f64) -> Vec<f64> {
        let r: Vec<_> = self.kernel.iter().map(|v| v.scaled(s)).collect();
        self.pack(self.theta_star, &r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{two_layer_bifurcation, Root};

    #[test]
    fn pack_round_trip_and_amplitude() {
        let p = two_layer_bifurcation(0.3, 2, Root::Plus, 10).unwrap();
        let prob = Problem::new(&p, 8, 64).unwrap();
        assert_eq!(prob.dim(), 17);
        let x = prob.predictor(0.25);
        let (theta, r) = prob.unpack(&x);
        assert_eq!(theta, p.theta);
        assert!((prob.amplitude(&r) - 0.25).abs() < 1e-15);
        assert_eq!(prob.pack(theta, &r), x);
    }

    #[test]
    fn trivial_state_is_exact() {
        let p = two_layer_bifurcation(0.3, 2, Root::Minus, 10).unwrap();
        let prob = Problem::new(&p, 8, 128).unwrap();
        let st = prob.trivial_state().unwrap();
        assert!(st.residual < 1e-15);
        assert_eq!(st.amplitude, 0.0);
        assert!((st.diagnostics.min_gap - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rejects_underresolved_grids() {
        let p = two_layer_bifurcation(0.3, 2, Root::Plus, 10).unwrap();
        assert_eq!(
            Problem::new(&p, 16, 64).unwrap_err().code(),
            "QUADRATURE_UNDERRESOLVED"
        );
        assert!(Problem::new(&p, 8, 66).is_err());
    }
}
