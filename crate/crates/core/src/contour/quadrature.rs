use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid `x_k = 2πk/N` with the tables the boundary
/// integrals need.
///
/// Tables indexed by a node difference `d` are stored for `d` in `0..2N` so
/// that `k - l + N` can be used directly without a modulo.
#[derive(Debug, Clone)]
pub struct Quadrature {
    n: usize,
    h: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    /// `4 sin²(π d / N)`
    chord: Vec<f64>,
    /// Kress weight `R_d` minus `h·log(4 sin²(πd/N))`; entry 0 holds `R_0`.
    log_correction: Vec<f64>,
    kress: Vec<f64>,
}

impl Quadrature {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "quadrature size must be even and at least 8, got {n}"
            )));
        }
        let h = 2.0 * PI / n as f64;
        let angle = |d: usize| 2.0 * PI * (d % n) as f64 / n as f64;
        let cos: Vec<f64> = (0..2 * n).map(|d| angle(d).cos()).collect();
        let sin: Vec<f64> = (0..2 * n).map(|d| angle(d).sin()).collect();
        let chord: Vec<f64> = (0..2 * n)
            .map(|d| {
                let s = (PI * (d % n) as f64 / n as f64).sin();
                4.0 * s * s
            })
            .collect();

        // Product rule for log(4 sin²((x - y)/2)), exact on trigonometric
        // polynomials of degree < N/2.
        let half = n / 2;
        let mut kress = vec![0.0; n];
        for (d, w) in kress.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 1..half {
                acc += cos[(k * d) % n] / k as f64;
            }
            let alt = if d % 2 == 0 { 1.0 } else { -1.0 };
            *w = -2.0 * PI / half as f64 * acc - PI / (half * half) as f64 * alt;
        }
        let log_correction = (0..2 * n)
            .map(|d| {
                let r = d % n;
                if r == 0 {
                    kress[0]
                } else {
                    kress[r] - h * chord[r].ln()
                }
            })
            .collect();

        Ok(Quadrature {
            n,
            h,
            cos,
            sin,
            chord,
            log_correction,
            kress,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn node(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    /// `cos(2π d/N)` for any `d < 2N`.
    #[inline]
    pub fn cos_at(&self, d: usize) -> f64 {
        self.cos[d]
    }

    #[inline]
    pub fn sin_at(&self, d: usize) -> f64 {
        self.sin[d]
    }

    pub(crate) fn cos_table(&self) -> &[f64] {
        &self.cos
    }

    pub(crate) fn sin_table(&self) -> &[f64] {
        &self.sin
    }

    pub(crate) fn chord_table(&self) -> &[f64] {
        &self.chord
    }

    pub(crate) fn log_correction_table(&self) -> &[f64] {
        &self.log_correction
    }

    /// Weight `R_d` of the logarithmic product rule.
    pub fn kress_weight(&self, d: usize) -> f64 {
        self.kress[d % self.n]
    }

    /// Trapezoid rule for a periodic integrand sampled on the grid.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.n);
        self.h * values.iter().sum::<f64>()
    }

    /// `∫ log(4 sin²((x_k - y)/2)) f(y) dy` for `f` sampled on the grid.
    pub fn log_sin_integral(&self, values: &[f64], k: usize) -> f64 {
        assert_eq!(values.len(), self.n);
        values
            .iter()
            .enumerate()
            .map(|(l, v)| self.kress[(k + self.n - l) % self.n] * v)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn a0(r: f64, m: u32) -> f64 {
        -2.0 * PI / m as f64 * r.powi(m as i32)
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Quadrature::new(7).is_err());
        assert!(Quadrature::new(6).is_err());
        assert!(Quadrature::new(8).is_ok());
    }

    #[test]
    fn product_rule_matches_log_sine_integral_at_unit_radius() {
        let q = Quadrature::new(64).unwrap();
        for m in 1..31u32 {
            let f: Vec<f64> = (0..64).map(|k| (m as f64 * q.node(k)).cos()).collect();
            for &k in &[0usize, 5, 17] {
                let got = q.log_sin_integral(&f, k);
                let want = a0(1.0, m) * (m as f64 * q.node(k)).cos();
                assert_abs_diff_eq!(got, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn product_rule_annihilates_constants() {
        let q = Quadrature::new(32).unwrap();
        let ones = vec![1.0; 32];
        assert_abs_diff_eq!(q.log_sin_integral(&ones, 3), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn correction_table_combines_weights() {
        let q = Quadrature::new(16).unwrap();
        for d in 1..16 {
            let want = q.kress_weight(d) - q.step() * q.chord_table()[d].ln();
            assert_eq!(q.log_correction_table()[d], want);
            assert_eq!(q.log_correction_table()[d + 16], want);
        }
    }
}
