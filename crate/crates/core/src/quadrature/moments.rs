use serde::Serialize;

use super::engine::{integrate, QuadratureSpec};
use crate::error::{domain, Result};
use crate::special::{beta, sphere_area};

/// Half-sphere moments ∫_{S^{N−1} ∩ {y_N > 0}} y_N^k dσ for k = 1, 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularMoments {
    pub n: u32,
    pub m1: f64,
    pub m3: f64,
    /// |S^{N−1}|
    pub omega: f64,
}

impl AngularMoments {
    pub fn new(n: u32) -> Result<Self> {
        Ok(Self {
            n,
            m1: angular_moment(n, 1)?,
            m3: angular_moment(n, 3)?,
            omega: sphere_area(n - 1),
        })
    }
}

/// ∫ y_N^k over the upper unit half-sphere in ℝᴺ, in Beta form
/// |S^{N−2}| · ½B((k+1)/2, (N−1)/2).
pub fn angular_moment(n: u32, k: u32) -> Result<f64> {
    if n < 5 {
        return domain(format!("angular moments are defined here for N ≥ 5, got {n}"));
    }
    if k != 1 && k != 3 {
        return domain(format!("only the moments k = 1, 3 are used, got {k}"));
    }
    let half_beta = 0.5 * beta(0.5 * f64::from(k + 1), 0.5 * f64::from(n - 1))?;
    Ok(sphere_area(n - 2) * half_beta)
}

/// The same moment by latitude quadrature, |S^{N−2}| ∫₀^{π/2} cos^kθ sin^{N−2}θ dθ.
pub fn angular_moment_by_latitude(n: u32, k: u32, spec: &QuadratureSpec) -> Result<f64> {
    if n < 2 {
        return domain(format!("dimension must be at least 2, got {n}"));
    }
    let r = integrate(
        |t: f64| t.cos().powi(k as i32) * t.sin().powi(n as i32 - 2),
        0.0,
        std::f64::consts::FRAC_PI_2,
        spec,
    )?;
    Ok(sphere_area(n - 2) * r.value)
}
