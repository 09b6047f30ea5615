use nalgebra::{DMatrix, Matrix2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::{BifurcationPoint, FamilyDetails, LinearizationBlock, DEGENERACY_TOL};
use crate::contour::{Family, LayerConfig};
use crate::error::{Error, Result};

/// Admissible `Θ_2` interval for a given `b_2` and fold.
pub fn parameter_window(b2: f64, m: usize) -> Result<(f64, f64)> {
    if m < 2 {
        return Err(Error::Domain(format!("fold must be at least 2, got {m}")));
    }
    let bmax = 0.5_f64.powf(1.0 / (2.0 * m as f64));
    if !(b2 > 0.0 && b2 < bmax) {
        return Err(Error::ParamWindow(format!(
            "b2 = {b2} must lie in (0, {bmax:.12})"
        )));
    }
    let mf = m as f64;
    let b2m = b2.powi(2 * m as i32);
    let lo = mf * (b2 * b2 - 1.0) / ((1.0 - b2m) * b2 * b2);
    let hi = (2.0 * b2.powi(2 * m as i32 - 2) * (b2 * b2 - 1.0) * mf / (1.0 - b2m))
        .min(-1.0 / (b2 * b2));
    Ok((lo, hi))
}

pub fn check_window(b2: f64, theta2: f64, m: usize) -> Result<()> {
    let (lo, hi) = parameter_window(b2, m)?;
    if theta2 > lo && theta2 < hi {
        Ok(())
    } else {
        Err(Error::ParamWindow(format!(
            "Θ2 = {theta2} must lie in ({lo:.12}, {hi:.12}) for b2 = {b2}, m = {m}"
        )))
    }
}

/// Mode-`n` block of the three-layer linearization with `b_1 = Θ_1 = 1`;
/// coefficients on `cos(mnx)` map to sine coefficients through `(-mn) M_n`.
pub fn three_layer_block(
    b2: f64,
    theta2: f64,
    b3: f64,
    theta3: f64,
    n: usize,
    m: usize,
) -> Result<LinearizationBlock> {
    if !(1.0 > b2 && b2 > b3 && b3 > 0.0) {
        return Err(Error::Domain(format!(
            "radii must satisfy 1 > b2 > b3 > 0, got b2 = {b2}, b3 = {b3}"
        )));
    }
    if n == 0 || m == 0 {
        return Err(Error::Domain("mode and fold must be positive".into()));
    }
    let k = (m * n) as f64;
    let ki = k as i32;
    let half = -0.5 + 0.5 / k;
    let q = b3 / b2;
    let entries = DMatrix::from_row_slice(
        3,
        3,
        &[
            half - theta2 * b2 * b2 / 2.0 - theta3 * b3 * b3 / 2.0,
            theta2 * b2 * b2.powi(ki) / (2.0 * k),
            theta3 * b3 * b3.powi(ki) / (2.0 * k),
            b2.powi(ki) / (2.0 * k),
            theta2 * b2 * half - b2 / 2.0 - theta3 * b3 * b3 / (2.0 * b2),
            theta3 * b3 * q.powi(ki) / (2.0 * k),
            b3.powi(ki) / (2.0 * k),
            theta2 * b2 * q.powi(ki) / (2.0 * k),
            theta3 * b3 * half - b3 / 2.0 - theta2 * b3 / 2.0,
        ],
    );
    Ok(LinearizationBlock::new(n, entries))
}

/// Coefficients `(B_0, B_1, B_2)` of `f(b_3) = B_0 b_3^{2m} + B_1 b_3² + B_2`,
/// which equals `(2m b_3 / b_2) det M_1` under the zero-circulation closure.
pub fn determinant_polynomial(b2: f64, theta2: f64, m: usize) -> [f64; 3] {
    let mf = m as f64;
    let bm = b2.powi(m as i32);
    let lead = -1.0 - theta2 * b2 * b2;
    let a33 = theta2 * (1.0 - b2.powi(2 * m as i32)) / (2.0 * mf)
        + (1.0 - b2 * b2) / (2.0 * b2 * b2);
    [
        lead * ((1.0 - 1.0 / (b2 * b2)) / (4.0 * mf)
            + theta2 * (bm - 1.0 / bm) / (4.0 * mf * mf * bm)),
        a33 * (-0.5 - theta2 / 2.0),
        a33 * lead * (-0.5 + 0.5 / mf),
    ]
}

fn closure_radius(b2: f64, theta2: f64, theta3: f64) -> f64 {
    (-(1.0 + theta2 * b2 * b2) / theta3).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeLayerDetails {
    pub b3: f64,
    /// `(B_0, B_1, B_2)`.
    pub determinant_poly: [f64; 3],
    /// `(C_0, C_1, C_2)` of `g(b_3) = C_0 b_3^{2m} + C_1 b_3² + C_2`.
    pub transversality_poly: [f64; 3],
    /// Determinant of the leading 2×2 minor of `M_1`.
    pub cm33_det: f64,
    /// `(b_2² - 1)/b_2`.
    pub d2: f64,
    /// `(1 + Θ_2 + Θ_3) b_3`.
    pub d3: f64,
}

/// Locates the three-layer bifurcation `(b_3, Θ_3*)` and certifies it.
pub fn three_layer_bifurcation(
    b2: f64,
    theta2: f64,
    m: usize,
    n_max: usize,
) -> Result<BifurcationPoint> {
    check_window(b2, theta2, m)?;
    if n_max < 2 {
        return Err(Error::Domain(format!("n_max must be at least 2, got {n_max}")));
    }
    let [p0, p1, p2] = determinant_polynomial(b2, theta2, m);
    if !(p0 > 0.0 && p1 > 0.0 && p2 < 0.0) {
        return Err(Error::NoRoot(format!(
            "sign pattern of ({p0:e}, {p1:e}, {p2:e}) is not (+, +, -)"
        )));
    }
    let f = |z: f64| p0 * z.powi(m as i32) + p1 * z + p2;
    let (mut lo, mut hi) = (0.0, b2 * b2);
    if !(f(hi) > 0.0) {
        return Err(Error::NoRoot(format!("f(b2) = {:e} is not positive", f(hi))));
    }
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b3 = (0.5 * (lo + hi)).sqrt();
    let theta3 = -(1.0 + theta2 * b2 * b2) / (b3 * b3);

    let m1 = three_layer_block(b2, theta2, b3, theta3, 1, m)?;
    let e = &m1.entries;
    let cm = Matrix2::new(e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]);
    let cm33_det = cm.determinant();
    let head = cm
        .lu()
        .solve(&Vector2::new(-e[(0, 2)], -e[(1, 2)]))
        .ok_or_else(|| Error::Degenerate("leading minor of M_1 is singular".into()))?;
    let kernel = vec![head[0], head[1], 1.0];

    let c1 = Vector3::new(e[(0, 0)], e[(1, 0)], e[(2, 0)]);
    let c2 = Vector3::new(e[(0, 1)], e[(1, 1)], e[(2, 1)]);
    let cross = c1.cross(&c2);
    let w = cross / cross.norm();
    let cokernel = vec![w[0], w[1], w[2]];

    let mf = m as f64;
    let lead = -1.0 - theta2 * b2 * b2;
    let c0 = (2.0 * mf - 1.0) / (8.0 * mf * mf)
        * (1.0 / (2.0 * b2) - b2 / 2.0 + theta2 / (2.0 * mf * b2.powi(2 * m as i32 - 1))
            - b2 * theta2 / (2.0 * mf));
    let c1g = cm33_det * (1.0 + theta2) / (4.0 * lead);
    let c2g = cm33_det * (-0.25 + 0.25 / mf);
    let g = c0 * b3.powi(2 * m as i32) + c1g * b3 * b3 + c2g;

    // Θ-derivative of M_1 along the closure b_3(Θ_3), by central differences.
    let h = 1e-6 * theta3.abs().max(1.0);
    let mp = three_layer_block(b2, theta2, closure_radius(b2, theta2, theta3 + h), theta3 + h, 1, m)?;
    let mm = three_layer_block(b2, theta2, closure_radius(b2, theta2, theta3 - h), theta3 - h, 1, m)?;
    let dm = (&mp.entries - &mm.entries) / (2.0 * h);
    let dv = &dm * DMatrix::from_column_slice(3, 1, &kernel);
    let crossing = (0..3).map(|i| cokernel[i] * dv[i]).sum();

    let (margin, margin_mode) = (2..=n_max)
        .map(|n| {
            three_layer_block(b2, theta2, b3, theta3, n, m).map(|blk| (blk.det.abs(), n))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
    if margin < DEGENERACY_TOL {
        return Err(Error::Degenerate(format!(
            "det M_{margin_mode} = {margin:e} below {DEGENERACY_TOL:e}"
        )));
    }

    let d2 = (b2 * b2 - 1.0) / b2;
    let d3 = (1.0 + theta2 + theta3) * b3;
    Ok(BifurcationPoint {
        fold: m,
        family: Family::ThreeLayer { b2, theta2 },
        theta: theta3,
        layers: vec![
            LayerConfig::new(1.0, 1.0),
            LayerConfig::new(b2, theta2),
            LayerConfig::new(b3, theta3),
        ],
        kernel,
        cokernel,
        transversality: g,
        crossing,
        det_m1: m1.row_normalized_det(),
        higher_mode_margin: margin,
        margin_mode,
        n_max,
        asymptotic_margin: (d2 * d3).abs() / 4.0,
        details: FamilyDetails::ThreeLayer(ThreeLayerDetails {
            b3,
            determinant_poly: [p0, p1, p2],
            transversality_poly: [c0, c1g, c2g],
            cm33_det,
            d2,
            d3,
        }),
    })
}
