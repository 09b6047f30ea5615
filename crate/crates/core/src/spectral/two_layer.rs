use nalgebra::{DMatrix, Vector2};
use serde::{Deserialize, Serialize};

use super::LinearizationBlock;
use crate::error::{Error, Result};

/// Relative tolerance on `Δ_m(Θ)` for accepting a requested root.
const ROOT_TOL: f64 = 1e-9;

fn check_b(b: f64) -> Result<()> {
    if b > 0.0 && b < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("inner radius b must lie in (0, 1), got {b}")))
    }
}

fn check_fold(m: usize) -> Result<()> {
    if m >= 2 {
        Ok(())
    } else {
        Err(Error::Domain(format!("fold must be at least 2, got {m}")))
    }
}

/// Linearization block at frequency `n` for the two-layer radial state with
/// `b_1 = 1`, `b_2 = b`, `Θ_1 = Θ`, `Θ_2 = -1`. Mode-`n` coefficients map
/// to output sine coefficients through `(-n) M_n`.
pub fn two_layer_block(b: f64, theta: f64, n: usize) -> Result<LinearizationBlock> {
    check_b(b)?;
    if n == 0 {
        return Err(Error::Domain("mode must be at least 1".into()));
    }
    let k = n as f64;
    let bn = b.powi(n as i32);
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            b * b / 2.0 - theta / 2.0 + theta / (2.0 * k),
            -b * bn / (2.0 * k),
            theta * bn / (2.0 * k),
            -b / (2.0 * k) + b * (1.0 - theta) / 2.0,
        ],
    );
    Ok(LinearizationBlock::new(n, m))
}

/// Dispersion polynomial `Δ_m(Θ) = (4m²/b) det M_m(Θ)`.
pub fn dispersion(b: f64, theta: f64, m: usize) -> f64 {
    let (a, bb, c) = dispersion_coefficients(b, m);
    a * theta * theta + bb * theta + c
}

fn dispersion_coefficients(b: f64, m: usize) -> (f64, f64, f64) {
    let mf = m as f64;
    let a = mf * (mf - 1.0);
    let bb = -((mf - 1.0).powi(2) + b * b * mf * mf - b.powi(2 * m as i32));
    let c = b * b * mf * (mf - 1.0);
    (a, bb, c)
}

/// Largest admissible inner radius: the root of `m - 1 - b m - b^m` in `(0, 1)`.
pub fn critical_radius(m: usize) -> Result<f64> {
    check_fold(m)?;
    let mf = m as f64;
    let d = |b: f64| mf - 1.0 - b * mf - b.powi(m as i32);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    // d(0) = m - 1 > 0, d(1) = -2 < 0, and d is decreasing on (0, 1).
    while hi - lo > 1e-16 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if d(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaRoots {
    pub minus: f64,
    pub plus: f64,
    /// Critical radius `b_m`.
    pub critical: f64,
}

/// The two bifurcation values `Θ_m^- < Θ_m^+` of the two-layer radial state.
pub fn theta_roots(b: f64, m: usize) -> Result<ThetaRoots> {
    check_fold(m)?;
    check_b(b)?;
    let critical = critical_radius(m)?;
    if b >= critical {
        return Err(Error::BTooLarge { b, m, critical });
    }
    let (a, bb, c) = dispersion_coefficients(b, m);
    let disc = bb * bb - 4.0 * a * c;
    if !(disc > 0.0) {
        return Err(Error::BTooLarge { b, m, critical });
    }
    // bb < 0 here, so this branch avoids cancellation.
    let q = -0.5 * (bb - disc.sqrt());
    let plus = q / a;
    let minus = c / q;
    Ok(ThetaRoots {
        minus,
        plus,
        critical,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLayerKernel {
    /// `v₀ = (b/2m - b(1-Θ)/2, Θ b^m / 2m)`, per layer on `cos(mx)`.
    pub kernel: [f64; 2],
    /// Second column of `M_m`; spans the image of the mode-m block.
    pub image: [f64; 2],
    /// Unit null vector of `M_mᵀ`, per layer on `sin(mx)`.
    pub cokernel: [f64; 2],
    /// `(Θ - (1 - (1+b^m)/m)) (Θ - (1 - (1-b^m)/m))`.
    pub transversality: f64,
    /// `cokernel · (∂_Θ M_m) v₀`, the same condition in projected form.
    pub crossing: f64,
}

/// Kernel, image, cokernel and transversality at a root of `Δ_m`.
pub fn kernel_and_transversality_2(b: f64, m: usize, theta: f64) -> Result<TwoLayerKernel> {
    check_fold(m)?;
    check_b(b)?;
    let delta = dispersion(b, theta, m);
    let (a, bb, c) = dispersion_coefficients(b, m);
    let scale = a * theta * theta + bb.abs() * theta.abs() + c;
    if delta.abs() > ROOT_TOL * scale {
        return Err(Error::NotARoot {
            theta,
            residual: delta,
        });
    }
    let mf = m as f64;
    let bm = b.powi(m as i32);
    let kernel = [
        b / (2.0 * mf) - b * (1.0 - theta) / 2.0,
        theta * bm / (2.0 * mf),
    ];
    let image = [
        -b * bm / (2.0 * mf),
        -b / (2.0 * mf) + b * (1.0 - theta) / 2.0,
    ];
    let w = Vector2::new(-image[1], image[0]).normalize();
    let dm = DMatrix::from_row_slice(
        2,
        2,
        &[-0.5 + 0.5 / mf, 0.0, bm / (2.0 * mf), -b / 2.0],
    );
    let w1 = &dm * DMatrix::from_column_slice(2, 1, &kernel);
    let crossing = w[0] * w1[0] + w[1] * w1[1];
    let transversality =
        (theta - (1.0 - (1.0 + bm) / mf)) * (theta - (1.0 - (1.0 - bm) / mf));
    Ok(TwoLayerKernel {
        kernel,
        image,
        cokernel: [w[0], w[1]],
        transversality,
        crossing,
    })
}
