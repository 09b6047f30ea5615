//! Contour-dynamics evaluation for nested vortex patches.
//!
//! Layer `i` has boundary `z_i(x) = (b_i + R_i(x))(cos x, sin x)` and carries
//! vorticity jump `Θ_i`, so `ω = Σ Θ_i 1_{D_i}`. The boundary velocity
//! integrals use the kernel `log|·|²` without the `1/4π` factor; the
//! functionals apply `1/4π` once when the layers are summed.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierEvenSeries;

mod family;
mod field;
mod functional;
mod interaction;
mod quadrature;

pub use family::{b3_closure, functional_g, Family, OuterLayers};
pub use field::{
    exterior_velocity_sup, stream_at, total_circulation, velocity_at, EnergyClass,
    VelocitySample,
};
pub use functional::{functional_f, Evaluation};
pub use interaction::InteractionSamples;
pub use quadrature::Quadrature;

/// Default number of quadrature nodes.
pub const DEFAULT_NODES: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerConfig {
    pub radius: f64,
    pub strength: f64,
}

impl LayerConfig {
    pub fn new(radius: f64, strength: f64) -> Self {
        LayerConfig { radius, strength }
    }
}

/// Nested layers, outermost first, with their boundary perturbations
/// sampled on a shared grid.
#[derive(Clone, Debug)]
pub struct PatchSystem {
    fold: usize,
    layers: Vec<LayerConfig>,
    perturbations: Vec<FourierEvenSeries>,
    quad: Arc<Quadrature>,
    rho: Vec<Vec<f64>>,
    drho: Vec<Vec<f64>>,
    resolution_tol: Option<f64>,
}

impl PatchSystem {
    pub fn new(
        fold: usize,
        layers: Vec<LayerConfig>,
        perturbations: Vec<FourierEvenSeries>,
        quad: Arc<Quadrature>,
    ) -> Result<Self> {
        if fold < 2 {
            return Err(Error::Domain(format!("fold must be at least 2, got {fold}")));
        }
        if layers.is_empty() || layers.len() != perturbations.len() {
            return Err(Error::Domain(format!(
                "{} layers but {} perturbations",
                layers.len(),
                perturbations.len()
            )));
        }
        for (i, l) in layers.iter().enumerate() {
            if !(l.radius > 0.0) || !l.radius.is_finite() || !l.strength.is_finite() {
                return Err(Error::Domain(format!("layer {i} has radius {}", l.radius)));
            }
            if i > 0 && l.radius >= layers[i - 1].radius {
                return Err(Error::Domain(format!(
                    "radii must decrease: b{} = {} >= b{} = {}",
                    i + 1,
                    l.radius,
                    i,
                    layers[i - 1].radius
                )));
            }
        }
        let n = quad.len();
        if !n.is_multiple_of(2 * fold) {
            return Err(Error::Domain(format!(
                "quadrature size {n} is not a multiple of 2m = {}",
                2 * fold
            )));
        }
        for p in &perturbations {
            if p.fold() != fold {
                return Err(Error::Domain(format!(
                    "perturbation fold {} differs from system fold {fold}",
                    p.fold()
                )));
            }
            if 2 * p.max_frequency() >= n {
                return Err(Error::QuadratureUnderresolved(format!(
                    "highest mode {} needs more than {n} nodes",
                    p.max_frequency()
                )));
            }
        }

        let (rho, drho): (Vec<_>, Vec<_>) = layers
            .iter()
            .zip(&perturbations)
            .map(|(l, p)| sample_boundary(&quad, l.radius, p))
            .unzip();

        // Node-major so the error names the first crossing node.
        #[allow(clippy::needless_range_loop)]
        for k in 0..n {
            for i in 0..layers.len() {
                let inner = if i + 1 < layers.len() { rho[i + 1][k] } else { 0.0 };
                if rho[i][k] <= inner {
                    return Err(Error::NestingViolation {
                        outer: i,
                        inner: i + 1,
                        node: k,
                    });
                }
            }
        }

        Ok(PatchSystem {
            fold,
            layers,
            perturbations,
            quad,
            rho,
            drho,
            resolution_tol: None,
        })
    }

    /// Radial system on `n_q` nodes with all perturbations zero.
    pub fn radial(fold: usize, layers: Vec<LayerConfig>, truncation: usize, n_q: usize) -> Result<Self> {
        let perts = vec![FourierEvenSeries::zeros(fold, truncation); layers.len()];
        Self::new(fold, layers, perts, Arc::new(Quadrature::new(n_q)?))
    }

    /// Makes [`PatchSystem::interaction`] re-evaluate on a doubled grid and
    /// fail when samples move by more than `tol`.
    pub fn with_resolution_check(mut self, tol: f64) -> Self {
        self.resolution_tol = Some(tol);
        self
    }

    pub fn fold(&self) -> usize {
        self.fold
    }

    pub fn layers(&self) -> &[LayerConfig] {
        &self.layers
    }

    pub fn perturbations(&self) -> &[FourierEvenSeries] {
        &self.perturbations
    }

    pub fn quadrature(&self) -> &Arc<Quadrature> {
        &self.quad
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn truncation(&self) -> usize {
        self.perturbations
            .iter()
            .map(|p| p.truncation())
            .max()
            .unwrap_or(0)
    }

    /// `b_i + R_i` at the nodes.
    pub fn boundary_radius(&self, i: usize) -> &[f64] {
        &self.rho[i]
    }

    /// `R_i'` at the nodes.
    pub fn boundary_slope(&self, i: usize) -> &[f64] {
        &self.drho[i]
    }

    /// Boundary point of layer `i` at node `k`.
    pub fn boundary_point(&self, i: usize, k: usize) -> [f64; 2] {
        let r = self.rho[i][k];
        [r * self.quad.cos_at(k), r * self.quad.sin_at(k)]
    }

    /// Radius of layer `i` at an arbitrary angle.
    pub fn radius_at(&self, i: usize, angle: f64) -> f64 {
        self.layers[i].radius + self.perturbations[i].eval(angle)
    }

    /// Smallest radial separation between consecutive boundaries (and of
    /// the innermost boundary from the origin) over the nodes.
    pub fn min_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for k in 0..self.quad.len() {
            for i in 0..self.len() {
                let inner = if i + 1 < self.len() { self.rho[i + 1][k] } else { 0.0 };
                gap = gap.min(self.rho[i][k] - inner);
            }
        }
        gap
    }

    /// Largest boundary radius over the nodes.
    pub fn max_radius(&self) -> f64 {
        self.rho
            .iter()
            .flat_map(|r| r.iter().copied())
            .fold(0.0, f64::max)
    }

    /// Same layers and perturbations on a different grid.
    pub fn resampled(&self, quad: Arc<Quadrature>) -> Result<Self> {
        let mut s = Self::new(
            self.fold,
            self.layers.clone(),
            self.perturbations.clone(),
            quad,
        )?;
        s.resolution_tol = self.resolution_tol;
        Ok(s)
    }
}

fn sample_boundary(quad: &Quadrature, b: f64, r: &FourierEvenSeries) -> (Vec<f64>, Vec<f64>) {
    let n = quad.len();
    let cos = quad.cos_table();
    let sin = quad.sin_table();
    let mut rho = vec![b; n];
    let mut drho = vec![0.0; n];
    for (idx, &a) in r.coeffs().iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let freq = (idx + 1) * r.fold();
        let fa = freq as f64 * a;
        for k in 0..n {
            let d = (freq * k) % n;
            rho[k] += a * cos[d];
            drho[k] -= fa * sin[d];
        }
    }
    (rho, drho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_layers() -> Vec<LayerConfig> {
        vec![LayerConfig::new(1.0, 0.5), LayerConfig::new(0.3, -1.0)]
    }

    #[test]
    fn sampling_matches_series_evaluation() {
        let q = Arc::new(Quadrature::new(64).unwrap());
        let r = FourierEvenSeries::new(2, vec![0.01, -0.02, 0.005]);
        let sys = PatchSystem::new(
            2,
            two_layers(),
            vec![r.clone(), FourierEvenSeries::zeros(2, 3)],
            q.clone(),
        )
        .unwrap();
        let dr = r.differentiate();
        for k in 0..64 {
            let x = q.node(k);
            assert!((sys.boundary_radius(0)[k] - 1.0 - r.eval(x)).abs() < 1e-15);
            assert!((sys.boundary_slope(0)[k] - dr.eval(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_crossing_boundaries() {
        let q = Arc::new(Quadrature::new(64).unwrap());
        let err = PatchSystem::new(
            2,
            two_layers(),
            vec![
                FourierEvenSeries::new(2, vec![-0.8]),
                FourierEvenSeries::zeros(2, 1),
            ],
            q,
        )
        .unwrap_err();
        assert_eq!(err.code(), "NESTING_VIOLATION");
    }

    #[test]
    fn rejects_unordered_radii_and_aliasing() {
        let layers = vec![LayerConfig::new(0.3, 1.0), LayerConfig::new(1.0, -1.0)];
        assert_eq!(
            PatchSystem::radial(2, layers, 4, 64).unwrap_err().code(),
            "DOMAIN"
        );
        let err = PatchSystem::radial(2, two_layers(), 16, 64).unwrap_err();
        assert_eq!(err.code(), "QUADRATURE_UNDERRESOLVED");
        let err = PatchSystem::radial(3, two_layers(), 2, 64).unwrap_err();
        assert_eq!(err.code(), "DOMAIN");
    }

    #[test]
    fn gap_of_radial_system() {
        let sys = PatchSystem::radial(2, two_layers(), 4, 64).unwrap();
        assert!((sys.min_gap() - 0.3).abs() < 1e-15);
        assert_eq!(sys.max_radius(), 1.0);
    }
}
