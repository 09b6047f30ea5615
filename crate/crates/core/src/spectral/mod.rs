//! Linearization at radial states and certification of bifurcation points.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::contour::{Family, LayerConfig};
use crate::error::{Error, Result};
use crate::fourier::{FourierEvenSeries, FourierOddSeries};

mod jacobian;
mod three_layer;
mod two_layer;

pub use jacobian::{decompose_dg, jacobian_fd, DgDecomposition};
pub use three_layer::{
    check_window, determinant_polynomial, parameter_window, three_layer_bifurcation,
    three_layer_block, ThreeLayerDetails,
};
pub use two_layer::{
    critical_radius, dispersion, kernel_and_transversality_2, theta_roots, two_layer_block,
    ThetaRoots, TwoLayerKernel,
};

/// Higher-mode determinants below this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Default highest harmonic checked for invertibility.
pub const DEFAULT_N_MAX: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearizationBlock {
    pub mode: usize,
    pub entries: DMatrix<f64>,
    pub det: f64,
}

impl LinearizationBlock {
    pub fn new(mode: usize, entries: DMatrix<f64>) -> Self {
        let det = entries.determinant();
        LinearizationBlock { mode, entries, det }
    }

    /// Determinant after scaling every row to unit Euclidean length.
    pub fn row_normalized_det(&self) -> f64 {
        let mut e = self.entries.clone();
        for mut row in e.row_iter_mut() {
            let n = row.norm();
            if n > 0.0 {
                row /= n;
            }
        }
        e.determinant()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Root {
    Minus,
    Plus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLayerDetails {
    pub b: f64,
    pub root: Option<Root>,
    pub roots: ThetaRoots,
    /// Generator of the image of the mode-m block.
    pub image: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyDetails {
    TwoLayer(TwoLayerDetails),
    ThreeLayer(ThreeLayerDetails),
}

/// A certified simple bifurcation from the radial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub fold: usize,
    pub family: Family,
    /// Bifurcation value of the family parameter.
    pub theta: f64,
    /// Radial layers at the bifurcation.
    pub layers: Vec<LayerConfig>,
    /// Per-layer amplitude of the kernel on `cos(mx)`.
    pub kernel: Vec<f64>,
    /// Unit per-layer amplitude of the cokernel on `sin(mx)`.
    pub cokernel: Vec<f64>,
    /// Closed-form transversality value (`τ` for two layers, `g(b_3)` for
    /// three layers).
    pub transversality: f64,
    /// `cokernel · ∂_Θ M_1 · kernel`.
    pub crossing: f64,
    /// `det M_1` with rows scaled to unit length.
    pub det_m1: f64,
    /// `min_{2 ≤ n ≤ n_max} |det M_n|`.
    pub higher_mode_margin: f64,
    /// Harmonic attaining the margin.
    pub margin_mode: usize,
    pub n_max: usize,
    /// Limit of the suitably rescaled `|det M_n|` as `n → ∞`.
    pub asymptotic_margin: f64,
    pub details: FamilyDetails,
}

impl BifurcationPoint {
    /// Kernel as perturbation series, scaled to unit L² norm.
    pub fn kernel_series(&self, truncation: usize) -> Vec<FourierEvenSeries> {
        let scale = 1.0 / (PI * self.kernel.iter().map(|v| v * v).sum::<f64>()).sqrt();
        self.kernel
            .iter()
            .map(|&v| FourierEvenSeries::single_mode(self.fold, truncation, 1, v * scale))
            .collect()
    }

    /// Cokernel as output series, scaled to unit L² norm.
    pub fn cokernel_series(&self, truncation: usize) -> Vec<FourierOddSeries> {
        let scale = 1.0 / PI.sqrt();
        self.cokernel
            .iter()
            .map(|&w| FourierOddSeries::single_mode(self.fold, truncation, 1, w * scale))
            .collect()
    }

    /// Block `M_n` at this point for harmonic `n` (frequency `n m`).
    pub fn block(&self, n: usize) -> Result<LinearizationBlock> {
        match self.details {
            FamilyDetails::TwoLayer(d) => two_layer_block(d.b, self.theta, n * self.fold),
            FamilyDetails::ThreeLayer(d) => match self.family {
                Family::ThreeLayer { b2, theta2 } => {
                    three_layer_block(b2, theta2, d.b3, self.theta, n, self.fold)
                }
                Family::TwoLayer { .. } => unreachable!("details match family"),
            },
        }
    }
}

/// Two-layer bifurcation at the selected root of `Δ_m`.
pub fn two_layer_bifurcation(b: f64, m: usize, root: Root, n_max: usize) -> Result<BifurcationPoint> {
    let roots = theta_roots(b, m)?;
    let theta = match root {
        Root::Minus => roots.minus,
        Root::Plus => roots.plus,
    };
    certify_two_layer(b, m, theta, Some(root), roots, n_max)
}

/// Two-layer bifurcation at an explicitly requested `Θ`, which must be a
/// root of `Δ_m`. `Θ = b²` (zero total vorticity) is refused with its own
/// error since `Δ_m(b²) ≠ 0`.
pub fn two_layer_bifurcation_at(b: f64, m: usize, theta: f64, n_max: usize) -> Result<BifurcationPoint> {
    let roots = theta_roots(b, m)?;
    if (theta - b * b).abs() <= 1e-12 * b * b {
        return Err(Error::ZeroMeanNoBifurcation {
            delta: dispersion(b, b * b, m),
        });
    }
    let root = if (theta - roots.plus).abs() <= 1e-9 * roots.plus {
        Some(Root::Plus)
    } else if (theta - roots.minus).abs() <= 1e-9 * roots.minus {
        Some(Root::Minus)
    } else {
        None
    };
    certify_two_layer(b, m, theta, root, roots, n_max)
}

fn certify_two_layer(
    b: f64,
    m: usize,
    theta: f64,
    root: Option<Root>,
    roots: ThetaRoots,
    n_max: usize,
) -> Result<BifurcationPoint> {
    if n_max < 2 {
        return Err(Error::Domain(format!("n_max must be at least 2, got {n_max}")));
    }
    let k = kernel_and_transversality_2(b, m, theta)?;
    if k.transversality == 0.0 {
        return Err(Error::Degenerate("transversality vanishes".into()));
    }
    let m1 = two_layer_block(b, theta, m)?;
    let mut margin = (f64::INFINITY, 0);
    for n in 2..=n_max {
        let d = two_layer_block(b, theta, n * m)?.det.abs();
        if d < margin.0 {
            margin = (d, n);
        }
    }
    if margin.0 < DEGENERACY_TOL {
        return Err(Error::Degenerate(format!(
            "det M_{} = {:e} below {DEGENERACY_TOL:e}",
            margin.1 * m,
            margin.0
        )));
    }
    Ok(BifurcationPoint {
        fold: m,
        family: Family::TwoLayer { b },
        theta,
        layers: vec![LayerConfig::new(1.0, theta), LayerConfig::new(b, -1.0)],
        kernel: k.kernel.to_vec(),
        cokernel: k.cokernel.to_vec(),
        transversality: k.transversality,
        crossing: k.crossing,
        det_m1: m1.row_normalized_det(),
        higher_mode_margin: margin.0,
        margin_mode: margin.1,
        n_max,
        asymptotic_margin: ((b * b - theta) * b * (1.0 - theta)).abs() / 4.0,
        details: FamilyDetails::TwoLayer(TwoLayerDetails {
            b,
            root,
            roots,
            image: k.image,
        }),
    })
}

/// Dispatches on the family: the two-layer case needs a root selector.
pub fn bifurcation_point(family: Family, m: usize, root: Root, n_max: usize) -> Result<BifurcationPoint> {
    match family {
        Family::TwoLayer { b } => two_layer_bifurcation(b, m, root, n_max),
        Family::ThreeLayer { b2, theta2 } => three_layer_bifurcation(b2, theta2, m, n_max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_layer_point_is_certified() {
        for root in [Root::Minus, Root::Plus] {
            let p = two_layer_bifurcation(0.3, 2, root, 50).unwrap();
            assert!(p.det_m1.abs() < 1e-12);
            assert!(p.higher_mode_margin > 1e-6);
            assert!(p.transversality.abs() > 1e-6);
            let v = p.kernel_series(4);
            let norm: f64 = v.iter().map(|s| s.dot(s)).sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_mean_request_is_refused() {
        let err = two_layer_bifurcation_at(0.3, 2, 0.09, 50).unwrap_err();
        assert_eq!(err.code(), "ZERO_MEAN_NO_BIFURCATION");
        let err = two_layer_bifurcation_at(0.3, 2, 0.3, 50).unwrap_err();
        assert_eq!(err.code(), "NOT_A_ROOT");
        let r = theta_roots(0.3, 2).unwrap();
        let p = two_layer_bifurcation_at(0.3, 2, r.plus, 50).unwrap();
        let FamilyDetails::TwoLayer(d) = p.details else {
            panic!("wrong family")
        };
        assert_eq!(d.root, Some(Root::Plus));
    }

    #[test]
    fn row_normalization() {
        let blk = LinearizationBlock::new(1, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]));
        assert_eq!(blk.det, 6.0);
        assert_eq!(blk.row_normalized_det(), 1.0);
    }

    #[test]
    fn block_lookup_uses_harmonic_index() {
        let p = three_layer_bifurcation(0.5, -5.0, 2, 10).unwrap();
        assert!(p.block(1).unwrap().det.abs() < 1e-12);
        let q = two_layer_bifurcation(0.3, 2, Root::Plus, 10).unwrap();
        assert!(q.block(1).unwrap().det.abs() < 1e-15);
        assert!(q.block(2).unwrap().det.abs() > 1e-6);
    }
}
