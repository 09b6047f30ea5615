use std::f64::consts::PI;

use super::{InteractionSamples, PatchSystem};
use crate::error::{Error, Result};
use crate::fourier::FourierOddSeries;

/// How many boundary nodes a functional evaluation visits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluation {
    /// Only the nodes strictly inside `(0, π/m)`. Valid because the output
    /// is odd and `2π/m`-periodic whenever every perturbation is an m-fold
    /// cosine series.
    Symmetric,
    /// Every node; used to measure symmetry defects.
    Full,
}

/// Stationarity functional with outputs truncated at the perturbations' `J`.
pub fn functional_f(system: &PatchSystem) -> Result<Vec<FourierOddSeries>> {
    system.functional()
}

impl PatchSystem {
    /// `(1/4π) Σ_i Θ_i (u^θ_{ij}, u^r_{ij})` at node `k` of boundary `j`.
    pub(crate) fn layer_velocity_at(&self, j: usize, k: usize) -> (f64, f64) {
        let mut t = 0.0;
        let mut r = 0.0;
        for (i, layer) in self.layers.iter().enumerate() {
            let (ti, ri) = self.interaction_at(i, j, k);
            t += layer.strength * ti;
            r += layer.strength * ri;
        }
        let scale = 1.0 / (4.0 * PI);
        (scale * t, scale * r)
    }

    /// Combined field of all layers on boundary `j`, scaled by `1/4π`.
    pub fn boundary_velocity(&self, j: usize) -> InteractionSamples {
        let n = self.quad.len();
        let mut out = InteractionSamples {
            tangential: vec![0.0; n],
            radial: vec![0.0; n],
        };
        for k in 0..n {
            let (t, r) = self.layer_velocity_at(j, k);
            out.tangential[k] = t;
            out.radial[k] = r;
        }
        out
    }

    /// Component `j` of the functional at node `k`.
    pub(crate) fn functional_at(&self, j: usize, k: usize) -> f64 {
        let (t, r) = self.layer_velocity_at(j, k);
        t * self.drho[j][k] - r * self.rho[j][k]
    }

    /// Functional values at every node, one vector per layer.
    pub fn functional_nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|j| (0..self.quad.len()).map(|k| self.functional_at(j, k)).collect())
            .collect()
    }

    pub fn functional(&self) -> Result<Vec<FourierOddSeries>> {
        self.functional_with(Evaluation::Symmetric, self.truncation())
    }

    /// Sine coefficients of each component for harmonics `1..=modes`.
    pub fn functional_with(
        &self,
        eval: Evaluation,
        modes: usize,
    ) -> Result<Vec<FourierOddSeries>> {
        let n = self.quad.len();
        let m = self.fold;
        if 2 * modes * m >= n {
            return Err(Error::QuadratureUnderresolved(format!(
                "{modes} output harmonics of fold {m} need more than {n} nodes"
            )));
        }
        let sin = self.quad.sin_table();
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.len() {
            let coeffs = match eval {
                Evaluation::Symmetric => {
                    let half = n / (2 * m);
                    let vals: Vec<f64> = (1..half).map(|k| self.functional_at(j, k)).collect();
                    (1..=modes)
                        .map(|h| {
                            let f = h * m;
                            let s: f64 = vals
                                .iter()
                                .enumerate()
                                .map(|(idx, v)| v * sin[(f * (idx + 1)) % n])
                                .sum();
                            4.0 * m as f64 * s / n as f64
                        })
                        .collect()
                }
                Evaluation::Full => {
                    let vals: Vec<f64> = (0..n).map(|k| self.functional_at(j, k)).collect();
                    (1..=modes)
                        .map(|h| {
                            let f = h * m;
                            let s: f64 = vals
                                .iter()
                                .enumerate()
                                .map(|(k, v)| v * sin[(f * k) % n])
                                .sum();
                            2.0 * s / n as f64
                        })
                        .collect()
                }
            };
            out.push(FourierOddSeries::new(m, coeffs));
        }
        Ok(out)
    }

    /// Largest discrete Fourier coefficient of the functional outside the
    /// m-fold sine space, including the mean.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.quad.len();
        let m = self.fold;
        let cos = self.quad.cos_table();
        let sin = self.quad.sin_table();
        let mut worst = 0.0_f64;
        for vals in self.functional_nodes() {
            let mean = vals.iter().sum::<f64>() / n as f64;
            worst = worst.max(mean.abs());
            for f in 1..=n / 2 {
                let (mut c, mut s) = (0.0, 0.0);
                for (k, v) in vals.iter().enumerate() {
                    let d = (f * k) % n;
                    c += v * cos[d];
                    s += v * sin[d];
                }
                let scale = if f == n / 2 { 1.0 } else { 2.0 } / n as f64;
                worst = worst.max((c * scale).abs());
                if f % m != 0 {
                    worst = worst.max((s * scale).abs());
                }
            }
        }
        worst
    }
}
