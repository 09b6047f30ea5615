use std::sync::Arc;

use super::{PatchSystem, Quadrature};
use crate::error::{Error, Result};

/// `∫ log|z_j(x) - z_i(y)|² z_i'(y) dy` projected on the polar frame at
/// `z_j(x)`, sampled on every node.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionSamples {
    pub tangential: Vec<f64>,
    pub radial: Vec<f64>,
}

impl PatchSystem {
    /// Field induced by layer `i` on boundary `j`.
    pub fn interaction(&self, i: usize, j: usize) -> Result<InteractionSamples> {
        self.check_layer(i)?;
        self.check_layer(j)?;
        let n = self.quad.len();
        let mut out = InteractionSamples {
            tangential: vec![0.0; n],
            radial: vec![0.0; n],
        };
        for k in 0..n {
            let (t, r) = self.interaction_at(i, j, k);
            out.tangential[k] = t;
            out.radial[k] = r;
        }
        if let Some(tol) = self.resolution_tol {
            let fine = self.resampled(Arc::new(Quadrature::new(2 * n)?))?;
            let mut worst = 0.0_f64;
            for k in 0..n {
                let (t, r) = fine.interaction_at(i, j, 2 * k);
                worst = worst
                    .max((t - out.tangential[k]).abs())
                    .max((r - out.radial[k]).abs());
            }
            if worst > tol {
                return Err(Error::QuadratureUnderresolved(format!(
                    "doubling {n} nodes moves interaction ({i},{j}) by {worst:e} > {tol:e}"
                )));
            }
        }
        Ok(out)
    }

    fn check_layer(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "layer index {i} out of range for {} layers",
                self.len()
            )))
        }
    }

    /// Tangential and radial components at node `k` of boundary `j`.
    pub(crate) fn interaction_at(&self, i: usize, j: usize, k: usize) -> (f64, f64) {
        let q = &*self.quad;
        let n = q.len();
        let h = q.step();
        let cos = q.cos_table();
        let sin = q.sin_table();
        let chord = q.chord_table();
        let rx = self.rho[j][k];
        let src = &self.rho[i];
        let dsrc = &self.drho[i];
        let off = k + n;

        let mut tan = 0.0;
        let mut rad = 0.0;
        if i != j {
            for l in 0..n {
                let d = off - l;
                let ry = src[l];
                let diff = rx - ry;
                let lg = (diff * diff + rx * ry * chord[d]).ln();
                tan += lg * (ry * cos[d] - dsrc[l] * sin[d]);
                rad += lg * (dsrc[l] * cos[d] + ry * sin[d]);
            }
            return (h * tan, h * rad);
        }

        // The logarithmic singularity is integrated by the product rule; the
        // smooth remainder takes its continuous limit on the diagonal.
        let corr = q.log_correction_table();
        let drx = dsrc[k];
        let w0 = h * (rx * rx + drx * drx).ln() + corr[0];
        tan += w0 * rx;
        rad += w0 * drx;
        let mut body = |l: usize| {
            let d = off - l;
            let ry = src[l];
            let diff = rx - ry;
            let w = h * (diff * diff + rx * ry * chord[d]).ln() + corr[d];
            tan += w * (ry * cos[d] - dsrc[l] * sin[d]);
            rad += w * (dsrc[l] * cos[d] + ry * sin[d]);
        };
        for l in 0..k {
            body(l);
        }
        for l in k + 1..n {
            body(l);
        }
        (tan, rad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::LayerConfig;
    use crate::fourier::FourierEvenSeries;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn radial(radii: &[f64], n: usize) -> PatchSystem {
        let layers = radii.iter().map(|&b| LayerConfig::new(b, 1.0)).collect();
        PatchSystem::radial(2, layers, 4, n).unwrap()
    }

    #[test]
    fn radial_layers_have_closed_form_tangential_field() {
        let sys = radial(&[1.0, 0.5, 0.25], 128);
        let b = [1.0, 0.5, 0.25];
        for i in 0..3 {
            for j in 0..3 {
                let s = sys.interaction(i, j).unwrap();
                let want = if i == j {
                    -2.0 * PI * b[i]
                } else {
                    let r = b[i].min(b[j]) / b[i].max(b[j]);
                    -2.0 * PI * b[i] * r
                };
                for k in 0..128 {
                    assert_abs_diff_eq!(s.tangential[k], want, epsilon = 1e-12);
                    assert_abs_diff_eq!(s.radial[k], 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    fn direct(sys: &PatchSystem, i: usize, j: usize, k: usize, fine: usize) -> (f64, f64) {
        // Midpoint rule on a fine staggered grid. On the diagonal the
        // singular part log(4 sin²) times the target value is subtracted;
        // it integrates to zero over a period.
        let x = sys.quadrature().node(k);
        let p = sys.perturbations();
        let b = sys.layers();
        let rx = b[j].radius + p[j].eval(x);
        let dr = p[i].differentiate();
        let (t0, r0) = if i == j { (rx, dr.eval(x)) } else { (0.0, 0.0) };
        let h = 2.0 * PI / fine as f64;
        let (mut t, mut r) = (0.0, 0.0);
        for l in 0..fine {
            let y = x + (l as f64 + 0.5) * h;
            let ry = b[i].radius + p[i].eval(y);
            let dry = dr.eval(y);
            let lg = (rx * rx + ry * ry - 2.0 * rx * ry * (x - y).cos()).ln();
            let ls = (4.0 * ((x - y) / 2.0).sin().powi(2)).ln();
            t += lg * (ry * (x - y).cos() - dry * (x - y).sin()) - ls * t0;
            r += lg * (dry * (x - y).cos() + ry * (x - y).sin()) - ls * r0;
        }
        (t * h, r * h)
    }

    #[test]
    fn perturbed_self_interaction_matches_brute_force() {
        let q = Arc::new(Quadrature::new(120).unwrap());
        let layers = vec![LayerConfig::new(1.0, 1.0), LayerConfig::new(0.4, -1.0)];
        let perts = vec![
            FourierEvenSeries::new(3, vec![0.05, -0.01]),
            FourierEvenSeries::new(3, vec![0.02, 0.004]),
        ];
        let sys = PatchSystem::new(3, layers, perts, q).unwrap();
        for (i, j) in [(0, 0), (1, 1), (0, 1), (1, 0)] {
            let s = sys.interaction(i, j).unwrap();
            for &k in &[0, 7, 30] {
                let (t, r) = direct(&sys, i, j, k, 200_000);
                assert_abs_diff_eq!(s.tangential[k], t, epsilon = 1e-8);
                assert_abs_diff_eq!(s.radial[k], r, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn resolution_check_flags_coarse_grids() {
        let q = Arc::new(Quadrature::new(16).unwrap());
        let layers = vec![LayerConfig::new(1.0, 1.0), LayerConfig::new(0.95, -1.0)];
        let perts = vec![
            FourierEvenSeries::new(2, vec![0.02]),
            FourierEvenSeries::zeros(2, 1),
        ];
        let sys = PatchSystem::new(2, layers, perts, q)
            .unwrap()
            .with_resolution_check(1e-10);
        let err = sys.interaction(1, 0).unwrap_err();
        assert_eq!(err.code(), "QUADRATURE_UNDERRESOLVED");

        let fine = radial(&[1.0, 0.5], 256).with_resolution_check(1e-10);
        assert!(fine.interaction(1, 0).is_ok());
    }
}
