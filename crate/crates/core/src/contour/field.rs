use std::f64::consts::PI;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use super::PatchSystem;
use crate::error::{Error, Result};

/// Relative standoff below which point evaluations are refused.
pub const STANDOFF: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocitySample {
    pub point: [f64; 2],
    pub velocity: [f64; 2],
    /// Projection on `(-sin x, cos x)` with `x` the polar angle of `point`.
    pub tangential: f64,
    /// Projection on `(cos x, sin x)`.
    pub radial: f64,
}

impl VelocitySample {
    fn new(point: [f64; 2], velocity: [f64; 2]) -> Self {
        let x = point[1].atan2(point[0]);
        let (s, c) = x.sin_cos();
        VelocitySample {
            point,
            velocity,
            tangential: -s * velocity[0] + c * velocity[1],
            radial: c * velocity[0] + s * velocity[1],
        }
    }

    pub fn speed(&self) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyClass {
    Finite,
    Infinite,
}

impl EnergyClass {
    pub fn classify(circulation: f64, tol: f64) -> Self {
        if circulation.abs() < tol {
            EnergyClass::Finite
        } else {
            EnergyClass::Infinite
        }
    }
}

fn check_standoff(system: &PatchSystem, p: [f64; 2]) -> Result<()> {
    let standoff = STANDOFF * system.layers()[0].radius;
    let rho = p[0].hypot(p[1]);
    let angle = p[1].atan2(p[0]);
    for i in 0..system.len() {
        if (rho - system.radius_at(i, angle)).abs() < standoff {
            return Err(Error::PointOnBoundary {
                x: p[0],
                y: p[1],
                layer: i,
            });
        }
    }
    Ok(())
}

/// Biot–Savart velocity `∇^⊥(ω * log|·|/2π)` written as boundary integrals,
/// `u(p) = -(1/4π) Σ Θ_i ∮ log|p - z_i|² dz_i`.
pub fn velocity_at(system: &PatchSystem, p: [f64; 2]) -> Result<VelocitySample> {
    check_standoff(system, p)?;
    let q = system.quadrature();
    let n = q.len();
    let mut u = [0.0; 2];
    for (i, layer) in system.layers().iter().enumerate() {
        let rho = system.boundary_radius(i);
        let drho = system.boundary_slope(i);
        let (mut ux, mut uy) = (0.0, 0.0);
        for l in 0..n {
            let (c, s) = (q.cos_at(l), q.sin_at(l));
            let dx = p[0] - rho[l] * c;
            let dy = p[1] - rho[l] * s;
            let lg = (dx * dx + dy * dy).ln();
            ux += lg * (drho[l] * c - rho[l] * s);
            uy += lg * (drho[l] * s + rho[l] * c);
        }
        let w = -layer.strength * q.step() / (4.0 * PI);
        u[0] += w * ux;
        u[1] += w * uy;
    }
    Ok(VelocitySample::new(p, u))
}

/// Stream function `(1/4π) Σ Θ_i ∫_{D_i} log|q - p|² dq`, with each area
/// integral turned into a boundary integral by the divergence theorem.
pub fn stream_at(system: &PatchSystem, p: [f64; 2]) -> Result<f64> {
    check_standoff(system, p)?;
    let q = system.quadrature();
    let n = q.len();
    let mut psi = 0.0;
    for (i, layer) in system.layers().iter().enumerate() {
        let rho = system.boundary_radius(i);
        let drho = system.boundary_slope(i);
        let mut acc = 0.0;
        for l in 0..n {
            let (c, s) = (q.cos_at(l), q.sin_at(l));
            let dx = rho[l] * c - p[0];
            let dy = rho[l] * s - p[1];
            // outward normal times arclength: (z_2', -z_1')
            let nx = drho[l] * s + rho[l] * c;
            let ny = -(drho[l] * c - rho[l] * s);
            let r2 = dx * dx + dy * dy;
            acc += (dx * nx + dy * ny) * (r2.ln() - 1.0) / 2.0;
        }
        psi += layer.strength * q.step() * acc;
    }
    Ok(psi / (4.0 * PI))
}

/// `∫ ω = Σ Θ_i ∫ (b_i + R_i)²/2 dx`, exact from the coefficients.
pub fn total_circulation(system: &PatchSystem) -> f64 {
    system
        .layers()
        .iter()
        .zip(system.perturbations())
        .map(|(l, r)| {
            let tail: f64 = r.coeffs().iter().map(|a| a * a).sum();
            l.strength * (PI * l.radius * l.radius + PI / 2.0 * tail)
        })
        .sum()
}

/// Largest number of Laurent terms before falling back to direct sampling.
const MAX_MOMENTS: usize = 400;

/// Moments `M_k = (1/2πi) Σ Θ_i ∫_{D_i} ζ^k dA` for `k < count`, so that
/// `u_1 - i u_2 = Σ M_k z^{-k-1}` outside every boundary. Each area
/// integral is `(1/2i) ∮ ζ̄ ζ^k dζ`.
fn multipole_moments(system: &PatchSystem, count: usize) -> Vec<Complex<f64>> {
    let q = system.quadrature();
    let mut moments = vec![Complex::new(0.0, 0.0); count];
    for (i, layer) in system.layers().iter().enumerate() {
        let rho = system.boundary_radius(i);
        let drho = system.boundary_slope(i);
        let mut acc = vec![Complex::new(0.0, 0.0); count];
        for l in 0..q.len() {
            let zeta = Complex::new(rho[l] * q.cos_at(l), rho[l] * q.sin_at(l));
            // ρ^{k+1} e^{ikx} (ρ' + iρ)
            let mut term = Complex::new(drho[l], rho[l]) * rho[l];
            for a in acc.iter_mut() {
                *a += term;
                term *= zeta;
            }
        }
        let w = -layer.strength * q.step() / (4.0 * PI);
        for (m, a) in moments.iter_mut().zip(&acc) {
            *m += a * w;
        }
    }
    moments
}

/// Largest speed on `n_samples` equispaced points of the circle `|p| = ρ`.
///
/// Outside the patch the velocity is summed from its Laurent expansion, so
/// rounding errors shrink with the field instead of growing like `log ρ`
/// as in the direct quadrature.
pub fn exterior_velocity_sup(system: &PatchSystem, rho: f64, n_samples: usize) -> Result<f64> {
    let r_max = system.max_radius();
    if !(rho > r_max) {
        return Err(Error::Domain(format!(
            "radius {rho} does not enclose the patch (max boundary radius {r_max})"
        )));
    }
    if n_samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let count = ((1e-18f64).ln() / (r_max / rho).ln()).ceil() as usize + 1;
    if count > MAX_MOMENTS.min(system.quadrature().len() / 2) {
        let mut worst = 0.0_f64;
        for k in 0..n_samples {
            let a = 2.0 * PI * k as f64 / n_samples as f64;
            worst = worst.max(velocity_at(system, [rho * a.cos(), rho * a.sin()])?.speed());
        }
        return Ok(worst);
    }
    let moments = multipole_moments(system, count);
    let mut worst = 0.0_f64;
    for k in 0..n_samples {
        let a = 2.0 * PI * k as f64 / n_samples as f64;
        let inv = Complex::from_polar(1.0 / rho, -a);
        // Horner in 1/z.
        let mut w = Complex::new(0.0, 0.0);
        for m in moments.iter().rev() {
            w = (w + m) * inv;
        }
        worst = worst.max(w.norm());
    }
    Ok(worst)
}
