//! Truncated m-fold symmetric Fourier series.
//!
//! Boundary perturbations live in the even space spanned by `cos(j m x)` and
//! functional outputs in the odd space spanned by `sin(j m x)`, `j = 1..=J`.
//! Neither space contains the constant mode, so every series has zero mean.

use std::f64::consts::PI;
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

mod projection;

pub use projection::{inner_product, project_kernel, tuple_norm};

/// Selects the trigonometric basis of a [`Series`].
pub trait Parity: Copy + Default + fmt::Debug + Send + Sync + 'static {
    const NAME: &'static str;
    fn basis(freq: f64, x: f64) -> f64;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Even;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Odd;

impl Parity for Even {
    const NAME: &'static str = "cos";
    #[inline]
    fn basis(freq: f64, x: f64) -> f64 {
        (freq * x).cos()
    }
}

impl Parity for Odd {
    const NAME: &'static str = "sin";
    #[inline]
    fn basis(freq: f64, x: f64) -> f64 {
        (freq * x).sin()
    }
}

/// `Σ_{j=1..J} c_j · basis(j m x)` with `m = fold` and `J = coeffs.len()`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Series<P: Parity> {
    fold: usize,
    coeffs: Vec<f64>,
    #[serde(skip)]
    parity: PhantomData<P>,
}

/// Cosine series `Σ a_{jm} cos(j m x)`.
pub type FourierEvenSeries = Series<Even>;
/// Sine series `Σ b_{jm} sin(j m x)`.
pub type FourierOddSeries = Series<Odd>;

/// Sobolev order `k` and analyticity strip width `c` of the spectral norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub sobolev_order: u32,
    pub strip_width: f64,
}

impl NormSpec {
    pub const L2: NormSpec = NormSpec {
        sobolev_order: 0,
        strip_width: 0.0,
    };

    pub fn sobolev(k: u32) -> Self {
        NormSpec {
            sobolev_order: k,
            strip_width: 0.0,
        }
    }

    pub fn analytic(k: u32, c: f64) -> Self {
        assert!(c >= 0.0, "strip width must be non-negative");
        NormSpec {
            sobolev_order: k,
            strip_width: c,
        }
    }

    /// Squared weight attached to frequency `freq`.
    pub fn weight(&self, freq: f64) -> f64 {
        let sobolev = (1.0 + freq).powi(2 * self.sobolev_order as i32);
        if self.strip_width == 0.0 {
            sobolev
        } else {
            let t = self.strip_width * freq;
            sobolev * (t.cosh().powi(2) + t.sinh().powi(2))
        }
    }
}

impl<P: Parity> fmt::Debug for Series<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series<{}>(m={}, {:?})", P::NAME, self.fold, self.coeffs)
    }
}

impl<P: Parity> Series<P> {
    /// Panics if `fold < 2` or `coeffs` is empty.
    pub fn new(fold: usize, coeffs: Vec<f64>) -> Self {
        assert!(fold >= 2, "fold must be at least 2, got {fold}");
        assert!(!coeffs.is_empty(), "truncation must be at least 1");
        Series {
            fold,
            coeffs,
            parity: PhantomData,
        }
    }

    pub fn zeros(fold: usize, truncation: usize) -> Self {
        Self::new(fold, vec![0.0; truncation])
    }

    /// `amplitude · basis(j m x)` for the 1-based harmonic index `j`.
    pub fn single_mode(fold: usize, truncation: usize, j: usize, amplitude: f64) -> Self {
        assert!((1..=truncation).contains(&j), "harmonic {j} outside 1..={truncation}");
        let mut s = Self::zeros(fold, truncation);
        s.coeffs[j - 1] = amplitude;
        s
    }

    pub fn fold(&self) -> usize {
        self.fold
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Frequency `j m` carried by the coefficient at 0-based index `idx`.
    #[inline]
    pub fn frequency(&self, idx: usize) -> f64 {
        ((idx + 1) * self.fold) as f64
    }

    /// Highest frequency `J m` represented.
    pub fn max_frequency(&self) -> usize {
        self.coeffs.len() * self.fold
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * P::basis(self.frequency(i), x))
            .sum()
    }

    /// Values on the uniform grid `x_k = 2πk/n`, `k = 0..n`.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        let h = 2.0 * PI / n as f64;
        (0..n).map(|k| self.eval(k as f64 * h)).collect()
    }

    /// Square root of `Σ |c_j|² (1+jm)^{2k} (cosh²(cjm) + sinh²(cjm))`.
    pub fn weighted_norm(&self, spec: &NormSpec) -> f64 {
        self.weighted_norm_sq(spec).sqrt()
    }

    pub(crate) fn weighted_norm_sq(&self, spec: &NormSpec) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * c * spec.weight(self.frequency(i)))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.weighted_norm(&NormSpec::L2)
    }

    pub fn sup_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |acc, c| acc.max(c.abs()))
    }

    /// Sharp low-pass filter: keeps modes with `j m <= cutoff`.
    pub fn smooth(&self, cutoff: f64) -> Self {
        assert!(cutoff > 0.0, "cutoff must be positive");
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if self.frequency(i) > cutoff {
                *c = 0.0;
            }
        }
        out
    }

    /// Same function, truncated or zero-padded to `truncation` modes.
    pub fn resized(&self, truncation: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(truncation, 0.0);
        Self::new(self.fold, coeffs)
    }

    /// L² inner product on `[0, 2π)`.
    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.fold, other.fold, "fold mismatch");
        PI * self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum::<f64>()
    }

    /// Galerkin projection of grid values onto the first `truncation`
    /// harmonics of this parity; other content is discarded.
    pub fn from_samples(fold: usize, truncation: usize, values: &[f64]) -> Self {
        let n = values.len();
        assert!(n > 0);
        let h = 2.0 * PI / n as f64;
        let coeffs = (1..=truncation)
            .map(|j| {
                let freq = (j * fold) as f64;
                let s: f64 = values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * P::basis(freq, k as f64 * h))
                    .sum();
                2.0 * s / n as f64
            })
            .collect();
        Self::new(fold, coeffs)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.fold, other.fold, "fold mismatch");
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                f(
                    self.coeffs.get(i).copied().unwrap_or(0.0),
                    other.coeffs.get(i).copied().unwrap_or(0.0),
                )
            })
            .collect();
        Self::new(self.fold, coeffs)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.fold, self.coeffs.iter().map(|c| c * factor).collect())
    }
}

impl FourierEvenSeries {
    /// `d/dx Σ a cos(jmx) = Σ -jm a sin(jmx)`.
    pub fn differentiate(&self) -> FourierOddSeries {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| -self.frequency(i) * a)
            .collect();
        FourierOddSeries::new(self.fold, coeffs)
    }
}

impl FourierOddSeries {
    /// `d/dx Σ b sin(jmx) = Σ jm b cos(jmx)`.
    pub fn differentiate(&self) -> FourierEvenSeries {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, b)| self.frequency(i) * b)
            .collect();
        FourierEvenSeries::new(self.fold, coeffs)
    }
}

impl<P: Parity> Add for &Series<P> {
    type Output = Series<P>;
    fn add(self, rhs: Self) -> Series<P> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<P: Parity> Sub for &Series<P> {
    type Output = Series<P>;
    fn sub(self, rhs: Self) -> Series<P> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<P: Parity> Mul<f64> for &Series<P> {
    type Output = Series<P>;
    fn mul(self, rhs: f64) -> Series<P> {
        self.scaled(rhs)
    }
}

impl<P: Parity> Neg for &Series<P> {
    type Output = Series<P>;
    fn neg(self) -> Series<P> {
        self.scaled(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn eval_examples() {
        let f = FourierEvenSeries::new(2, vec![1.0]);
        assert_eq!(f.eval(0.0), 1.0);
        assert_abs_diff_eq!(f.eval(PI / 4.0), 0.0, epsilon = 1e-16);

        let g = FourierEvenSeries::new(3, vec![0.5, 0.25]);
        let direct = 0.5 * (0.3_f64).cos() + 0.25 * (0.6_f64).cos();
        assert_abs_diff_eq!(g.eval(0.1), direct, epsilon = 1e-15);
        assert_abs_diff_eq!(g.eval(0.1), 0.684002, epsilon = 1e-6);

        let s = FourierOddSeries::new(2, vec![0.0, 2.0]);
        assert_abs_diff_eq!(s.eval(0.2), 2.0 * (0.8_f64).sin(), epsilon = 1e-15);
    }

    #[test]
    fn differentiate_examples() {
        let d = FourierEvenSeries::new(2, vec![1.0]).differentiate();
        assert_eq!(d.coeffs(), &[-2.0]);
        let z = FourierEvenSeries::zeros(2, 3).differentiate();
        assert!(z.coeffs().iter().all(|&c| c == 0.0));
        let d = FourierEvenSeries::new(2, vec![0.3, 0.1]).differentiate();
        assert_abs_diff_eq!(d.coeffs()[0], -0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(d.coeffs()[1], -0.4, epsilon = 1e-15);
        assert_eq!(d.truncation(), 2);
    }

    #[test]
    fn second_derivative_is_exact() {
        for j in 1..=5 {
            let f = FourierEvenSeries::single_mode(3, 5, j, 1.0);
            let dd = f.differentiate().differentiate();
            let freq = (3 * j) as f64;
            assert_eq!(dd.coeffs()[j - 1], -freq * freq);
        }
    }

    #[test]
    fn norm_examples() {
        let f = FourierEvenSeries::new(2, vec![1.0]);
        assert_eq!(f.weighted_norm(&NormSpec::L2), 1.0);
        assert_abs_diff_eq!(f.weighted_norm(&NormSpec::sobolev(1)), 3.0, epsilon = 1e-15);
        let expect = ((1.0_f64).cosh().powi(2) + (1.0_f64).sinh().powi(2)).sqrt();
        assert_abs_diff_eq!(
            f.weighted_norm(&NormSpec::analytic(0, 0.5)),
            expect,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(expect, 1.939638, epsilon = 1e-6);
    }

    #[test]
    fn smooth_examples() {
        // modes {2, 4, 8} with m = 2: j = 1, 2, 4
        let f = FourierEvenSeries::new(2, vec![1.0, 2.0, 0.0, 3.0]);
        assert_eq!(f.smooth(5.0).coeffs(), &[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(f.smooth(8.0), f);
        assert_eq!(f.smooth(100.0), f);
    }

    #[test]
    fn smoothing_inequalities_hold_with_unit_constant() {
        let f = FourierEvenSeries::new(2, (1..=20).map(|j| 1.0 / (j * j) as f64).collect());
        for &cutoff in &[3.0, 7.5, 16.0, 41.0] {
            for k in 0..3u32 {
                for beta in 1..4u32 {
                    let low = f.smooth(cutoff);
                    let high = &f - &low;
                    let lhs = low.weighted_norm(&NormSpec::sobolev(k + beta));
                    let rhs = cutoff.powi(beta as i32) * f.weighted_norm(&NormSpec::sobolev(k));
                    assert!(lhs <= rhs * (1.0 + 1e-14), "{lhs} > {rhs}");
                    let lhs = high.weighted_norm(&NormSpec::sobolev(k));
                    let rhs =
                        cutoff.powi(-(beta as i32)) * f.weighted_norm(&NormSpec::sobolev(k + beta));
                    assert!(lhs <= rhs * (1.0 + 1e-14), "{lhs} > {rhs}");
                }
            }
        }
    }

    #[test]
    fn arithmetic_keeps_widest_truncation() {
        let a = FourierEvenSeries::new(2, vec![1.0]);
        let b = FourierEvenSeries::new(2, vec![1.0, 2.0, 3.0]);
        let c = &a + &b;
        assert_eq!(c.coeffs(), &[2.0, 2.0, 3.0]);
        let d = &a - &b;
        assert_eq!(d.coeffs(), &[0.0, -2.0, -3.0]);
    }

    #[test]
    fn sample_projection_recovers_coefficients() {
        let f = FourierOddSeries::new(3, vec![0.3, -0.2, 0.05]);
        let back = FourierOddSeries::from_samples(3, 3, &f.samples(64));
        for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    fn trapezoid_l2_sq(values: &[f64]) -> f64 {
        let h = 2.0 * PI / values.len() as f64;
        values.iter().map(|v| v * v).sum::<f64>() * h
    }

    proptest! {
        #[test]
        fn parseval_matches_quadrature(
            fold in 2usize..6,
            coeffs in prop::collection::vec(-1.0f64..1.0, 1..12),
        ) {
            let j = coeffs.len();
            let n = 4 * j * fold;
            let even = FourierEvenSeries::new(fold, coeffs.clone());
            let odd = FourierOddSeries::new(fold, coeffs);
            for (norm, samples) in [
                (even.l2_norm(), even.samples(n)),
                (odd.l2_norm(), odd.samples(n)),
            ] {
                let quad = trapezoid_l2_sq(&samples) / PI;
                prop_assert!((norm * norm - quad).abs() < 1e-12);
            }
        }

        #[test]
        fn smooth_is_idempotent(
            coeffs in prop::collection::vec(-1.0f64..1.0, 1..16),
            cutoff in 0.5f64..40.0,
        ) {
            let f = FourierEvenSeries::new(2, coeffs);
            let once = f.smooth(cutoff);
            prop_assert_eq!(once.smooth(cutoff), once);
        }
    }
}
