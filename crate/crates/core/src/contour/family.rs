use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{LayerConfig, PatchSystem, Quadrature};
use crate::error::{Error, Result};
use crate::fourier::{FourierEvenSeries, FourierOddSeries};

/// The two fixed outer layers of the three-layer problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterLayers {
    pub b1: f64,
    pub theta1: f64,
    pub b2: f64,
    pub theta2: f64,
}

impl OuterLayers {
    /// `b_1 = Θ_1 = 1`.
    pub fn normalized(b2: f64, theta2: f64) -> Self {
        OuterLayers {
            b1: 1.0,
            theta1: 1.0,
            b2,
            theta2,
        }
    }
}

/// `∫ (b + R)² dx` over one period, exact for a cosine series.
fn squared_radius_integral(b: f64, r: &FourierEvenSeries) -> f64 {
    2.0 * PI * b * b + PI * r.coeffs().iter().map(|a| a * a).sum::<f64>()
}

/// Inner radius that makes the total vorticity vanish:
/// `Σ Θ_i ∫ (b_i + R_i)² dx = 0`.
pub fn b3_closure(theta3: f64, r: &[FourierEvenSeries], fixed: &OuterLayers) -> Result<f64> {
    if r.len() != 3 {
        return Err(Error::Domain(format!("expected 3 perturbations, got {}", r.len())));
    }
    if theta3 == 0.0 || !theta3.is_finite() {
        return Err(Error::Domain(format!("Θ3 must be finite and non-zero, got {theta3}")));
    }
    let outer = fixed.theta1 * squared_radius_integral(fixed.b1, &r[0])
        + fixed.theta2 * squared_radius_integral(fixed.b2, &r[1]);
    let tail = PI * r[2].coeffs().iter().map(|a| a * a).sum::<f64>();
    let radicand = -(outer + theta3 * tail) / (2.0 * PI * theta3);
    if !(radicand > 0.0) {
        return Err(Error::NegativeRadicand(radicand));
    }
    let b3 = radicand.sqrt();
    if b3 >= fixed.b2 {
        return Err(Error::NotNested { b3, b2: fixed.b2 });
    }
    Ok(b3)
}

/// Three-layer functional with the closure radius substituted.
pub fn functional_g(
    theta3: f64,
    r: &[FourierEvenSeries],
    fixed: &OuterLayers,
    fold: usize,
    quad: Arc<Quadrature>,
) -> Result<Vec<FourierOddSeries>> {
    let b3 = b3_closure(theta3, r, fixed)?;
    let layers = vec![
        LayerConfig::new(fixed.b1, fixed.theta1),
        LayerConfig::new(fixed.b2, fixed.theta2),
        LayerConfig::new(b3, theta3),
    ];
    PatchSystem::new(fold, layers, r.to_vec(), quad)?.functional()
}

/// One-parameter families of nested patches.
///
/// Two layers: `b_1 = 1`, `b_2 = b`, `Θ_1 = Θ` (the parameter), `Θ_2 = -1`.
/// Three layers: `b_1 = Θ_1 = 1`, fixed `(b_2, Θ_2)`, parameter `Θ_3`, and
/// `b_3` from the zero-circulation closure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    TwoLayer { b: f64 },
    ThreeLayer { b2: f64, theta2: f64 },
}

impl Family {
    pub fn n_layers(&self) -> usize {
        match self {
            Family::TwoLayer { .. } => 2,
            Family::ThreeLayer { .. } => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::TwoLayer { .. } => "two_layer",
            Family::ThreeLayer { .. } => "three_layer",
        }
    }

    /// Whether the family enforces zero total vorticity.
    pub fn zero_circulation(&self) -> bool {
        matches!(self, Family::ThreeLayer { .. })
    }

    pub fn layers(&self, theta: f64, r: &[FourierEvenSeries]) -> Result<Vec<LayerConfig>> {
        match *self {
            Family::TwoLayer { b } => Ok(vec![LayerConfig::new(1.0, theta), LayerConfig::new(b, -1.0)]),
            Family::ThreeLayer { b2, theta2 } => {
                let fixed = OuterLayers::normalized(b2, theta2);
                let b3 = b3_closure(theta, r, &fixed)?;
                Ok(vec![
                    LayerConfig::new(1.0, 1.0),
                    LayerConfig::new(b2, theta2),
                    LayerConfig::new(b3, theta),
                ])
            }
        }
    }

    pub fn system(
        &self,
        fold: usize,
        theta: f64,
        r: &[FourierEvenSeries],
        quad: Arc<Quadrature>,
    ) -> Result<PatchSystem> {
        if r.len() != self.n_layers() {
            return Err(Error::Domain(format!(
                "{} expects {} perturbations, got {}",
                self.name(),
                self.n_layers(),
                r.len()
            )));
        }
        PatchSystem::new(fold, self.layers(theta, r)?, r.to_vec(), quad)
    }

    pub fn functional(
        &self,
        fold: usize,
        theta: f64,
        r: &[FourierEvenSeries],
        quad: Arc<Quadrature>,
    ) -> Result<Vec<FourierOddSeries>> {
        self.system(fold, theta, r, quad)?.functional()
    }
}
