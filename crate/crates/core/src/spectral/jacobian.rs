use std::sync::Arc;

use nalgebra::DMatrix;

use crate::contour::{Family, Quadrature};
use crate::error::{Error, Result};
use crate::fourier::FourierEvenSeries;

/// Central-difference Jacobian of `f` at `x`, with step
/// `h_rel · max(1, |x_i|)` in coordinate `i`.
pub fn jacobian_fd<F>(mut f: F, x: &[f64], h_rel: f64) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if !(h_rel > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {h_rel}")));
    }
    let mut xp = x.to_vec();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = h_rel * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let fp = f(&xp)?;
        xp[i] = x[i] - h;
        let fm = f(&xp)?;
        xp[i] = x[i];
        if fp.len() != fm.len() {
            return Err(Error::Domain("function output changed length".into()));
        }
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect());
    }
    let rows = cols.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows, x.len(), |r, c| cols[c][r]))
}

/// Finite-difference linearization of the functional at a radial state,
/// split by harmonic.
#[derive(Clone, Debug)]
pub struct DgDecomposition {
    pub fold: usize,
    pub truncation: usize,
    /// `blocks[n-1]` is the layer-by-layer derivative of sine mode `n`
    /// with respect to cosine mode `n`, divided by `-n m`.
    pub blocks: Vec<DMatrix<f64>>,
    /// Derivative in the family parameter, flattened layer by layer.
    pub d_theta: Vec<f64>,
    /// Largest entry coupling different harmonics.
    pub leakage: f64,
}

fn flatten(series: &[impl AsRef<[f64]>]) -> Vec<f64> {
    series.iter().flat_map(|s| s.as_ref().iter().copied()).collect()
}

/// Differentiates the functional of `family` at the radial state with
/// parameter `theta`, keeping `truncation` modes per layer.
pub fn decompose_dg(
    family: Family,
    fold: usize,
    theta: f64,
    truncation: usize,
    n_q: usize,
    h_rel: f64,
) -> Result<DgDecomposition> {
    let p = family.n_layers();
    let quad = Arc::new(Quadrature::new(n_q)?);
    let unpack = |x: &[f64]| -> Vec<FourierEvenSeries> {
        x.chunks(truncation)
            .map(|c| FourierEvenSeries::new(fold, c.to_vec()))
            .collect()
    };
    let eval = |theta: f64, x: &[f64]| -> Result<Vec<f64>> {
        let g = family.functional(fold, theta, &unpack(x), quad.clone())?;
        Ok(flatten(&g.iter().map(|s| s.coeffs().to_vec()).collect::<Vec<_>>()))
    };
    let x0 = vec![0.0; p * truncation];
    let jr = jacobian_fd(|x| eval(theta, x), &x0, h_rel)?;
    let jt = jacobian_fd(|t| eval(t[0], &x0), &[theta], h_rel)?;

    let mut blocks = Vec::with_capacity(truncation);
    for n in 1..=truncation {
        let scale = -((n * fold) as f64);
        blocks.push(DMatrix::from_fn(p, p, |i, k| {
            jr[(i * truncation + n - 1, k * truncation + n - 1)] / scale
        }));
    }
    let mut leakage = 0.0_f64;
    for r in 0..p * truncation {
        for c in 0..p * truncation {
            if r % truncation != c % truncation {
                leakage = leakage.max(jr[(r, c)].abs());
            }
        }
    }
    Ok(DgDecomposition {
        fold,
        truncation,
        blocks,
        d_theta: jt.column(0).iter().copied().collect(),
        leakage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{
        theta_roots, three_layer_bifurcation, three_layer_block, two_layer_block,
    };

    #[test]
    fn fd_jacobian_of_a_polynomial_map() {
        let j = jacobian_fd(
            |x| Ok(vec![x[0] * x[0] * x[1], x[1].sin()]),
            &[1.5, 0.3],
            1e-6,
        )
        .unwrap();
        assert!((j[(0, 0)] - 2.0 * 1.5 * 0.3).abs() < 1e-8);
        assert!((j[(0, 1)] - 2.25).abs() < 1e-8);
        assert!(j[(1, 0)].abs() < 1e-12);
        assert!((j[(1, 1)] - 0.3f64.cos()).abs() < 1e-8);
    }

    #[test]
    fn two_layer_blocks_match_functional_derivative() {
        let b = 0.3;
        let theta = theta_roots(b, 2).unwrap().plus;
        let d = decompose_dg(Family::TwoLayer { b }, 2, theta, 4, 128, 1e-6).unwrap();
        for (n, blk) in d.blocks.iter().enumerate() {
            let exact = two_layer_block(b, theta, 2 * (n + 1)).unwrap().entries;
            assert!((blk - exact).amax() < 1e-7, "harmonic {}", n + 1);
        }
        assert!(d.leakage < 1e-7);
        assert!(d.d_theta.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn three_layer_blocks_match_functional_derivative() {
        let p = three_layer_bifurcation(0.5, -5.0, 2, 10).unwrap();
        let b3 = p.layers[2].radius;
        let d = decompose_dg(p.family, 2, p.theta, 3, 128, 1e-6).unwrap();
        for (n, blk) in d.blocks.iter().enumerate() {
            let exact = three_layer_block(0.5, -5.0, b3, p.theta, n + 1, 2)
                .unwrap()
                .entries;
            assert!((blk - exact).amax() < 1e-7, "harmonic {}", n + 1);
        }
        assert!(d.leakage < 1e-7);
    }
}
