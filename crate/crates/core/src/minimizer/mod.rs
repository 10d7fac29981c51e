//! Radial Neumann problem on a ball: discretisation, least-energy search by
//! normalized gradient flow, the linear-stability threshold of the constant
//! solution, and α-bisection.
//!
//! Only radial fields are represented, so every quotient found here is an upper
//! bound for the least energy over all of H²(B_R).

mod banded;
mod eigen;
mod flow;
mod operator;
mod threshold;

pub use banded::{BandedCholesky, SymBanded};
pub use eigen::{first_neumann_mode, linear_stability_alpha, NeumannMode};
pub use flow::{minimize_dofs, minimize_quotient, perturbed_constant, Classification, FlowOptions, MinimizeResult, CLASSIFY_THRESHOLD};
pub use operator::{assemble_operator, DiscreteOperator};
pub use threshold::{balance_check, threshold_scan, BalanceReport, ScanPoint, ThresholdResult, SEED_AMPLITUDE};

use serde::Serialize;

use crate::error::{domain, Result};
use crate::rayleigh::RadialGrid;
use crate::special::{ball_volume, DimensionParams};

/// Δ²u − cΔu + αu = |u|^{p−1}u on B_R with u′(R) = (Δu)′(R) = 0.
///
/// The gradient coefficient c is 1 for the problem itself; other values arise when
/// a ball of radius R is rescaled to the unit ball (c = R², α ↦ αR⁴).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallProblem {
    dims: DimensionParams,
    alpha: f64,
    exponent_p: f64,
    grad_coeff: f64,
    grid: RadialGrid,
}

impl BallProblem {
    /// Critical exponent, unit gradient coefficient, `nodes` uniform grid points.
    pub fn new(dims: DimensionParams, radius: f64, alpha: f64, nodes: usize) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return domain(format!("α must be positive and finite, got {alpha}"));
        }
        let grid = RadialGrid::uniform(radius, nodes)?;
        Ok(Self {
            dims,
            alpha,
            exponent_p: dims.critical_power(),
            grad_coeff: 1.0,
            grid,
        })
    }

    /// Subcritical power p ∈ (2, (N+4)/(N−4)].
    pub fn with_exponent(mut self, p: f64) -> Result<Self> {
        let crit = self.dims.critical_power();
        if !(p > 2.0 && p <= crit) {
            return domain(format!("exponent must lie in (2, {crit}], got {p}"));
        }
        self.exponent_p = p;
        Ok(self)
    }

    pub fn with_grad_coeff(mut self, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return domain(format!("gradient coefficient must be nonnegative, got {c}"));
        }
        self.grad_coeff = c;
        Ok(self)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return domain(format!("α must be positive and finite, got {alpha}"));
        }
        Ok(Self { alpha, ..self.clone() })
    }

    pub fn dims(&self) -> DimensionParams {
        self.dims
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn exponent_p(&self) -> f64 {
        self.exponent_p
    }

    pub fn grad_coeff(&self) -> f64 {
        self.grad_coeff
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn radius(&self) -> f64 {
        self.grid.radius()
    }

    /// |B_R|.
    pub fn volume(&self) -> f64 {
        ball_volume(self.dims.n(), self.radius())
    }

    /// The positive constant solution α^{1/(p−1)}.
    pub fn constant_solution(&self) -> f64 {
        self.alpha.powf(1.0 / (self.exponent_p - 1.0))
    }

    /// ᾱ(N, |B_R|).
    pub fn alpha_bar(&self) -> Result<f64> {
        self.dims.alpha_bar(self.volume())
    }
}
