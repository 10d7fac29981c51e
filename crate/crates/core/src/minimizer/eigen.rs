//! First nonconstant mode of the pencil (Δ² − cΔ)φ = Λφ under the Neumann conditions.

use serde::Serialize;

use super::banded::{BandedCholesky, SymBanded};
use super::operator::DiscreteOperator;
use crate::error::{Error, Result};

const MAX_ITER: usize = 500;
const TOL: f64 = 1e-12;

/// Λ₁ with its eigenfield, scaled so that max|φ| = 1 and φ(0) > 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeumannMode {
    pub lambda1: f64,
    pub eigenfield: Vec<f64>,
    pub iterations: usize,
    /// ‖Kφ − ΛMφ‖/(Λ‖Mφ‖).
    pub residual: f64,
}

/// Shift-invert inverse iteration with the constants deflated in the weighted inner product.
/// The eigenfield is returned as Hermite degrees of freedom.
pub fn first_neumann_mode(op: &DiscreteOperator) -> Result<NeumannMode> {
    let problem = op.problem();
    let c = problem.grad_coeff();
    let radius = problem.grid().radius();
    // shift well below Λ₁ ≥ μ₁² + cμ₁ with μ₁ of order 1/R²
    let shift = 0.1 * (radius.powi(-4) + c * radius.powi(-2));
    let pencil = SymBanded::combine(&[(1.0, &op.bilap), (c, &op.grad)]);
    let shifted = SymBanded::combine(&[(1.0, &pencil), (shift, &op.mass)]);
    let factor = BandedCholesky::factor(&shifted).map_err(|e| Error::Eigen(e.to_string()))?;

    let ones = op.constant_dofs(1.0);
    let deflate = |x: &mut Vec<f64>| {
        let mean = op.mean(x);
        x.iter_mut().zip(&ones).for_each(|(v, o)| *v -= mean * o);
        let norm = op.inner(x, x).sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    };

    let mut x = op.dofs_from_function(|r| r * r, |r| 2.0 * r);
    deflate(&mut x);
    let mut lambda = f64::NAN;
    for it in 1..=MAX_ITER {
        let mut y = factor.solve(&op.mass.matvec(&x));
        deflate(&mut y);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigen("non-finite iterate".into()));
        }
        let next = op.bilap_energy(&y) + c * op.grad_energy(&y);
        let converged = (next - lambda).abs() <= TOL * next.abs();
        lambda = next;
        x = y;
        if converged {
            if !(lambda > 0.0) {
                return Err(Error::Eigen(format!("nonpositive eigenvalue {lambda:e}")));
            }
            let image: Vec<f64> = op
                .apply_bilaplacian(&x)
                .iter()
                .zip(op.apply_neg_laplacian(&x))
                .zip(&x)
                .map(|((b, a), v)| b + c * a - lambda * v)
                .collect();
            let residual = op.inner(&image, &image).sqrt() / lambda;
            let values = op.nodal_values(&x);
            let peak = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let sign = if values[0] < 0.0 { -1.0 } else { 1.0 };
            let eigenfield = x.iter().map(|v| sign * v / peak).collect();
            return Ok(NeumannMode {
                lambda1: lambda,
                eigenfield,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::Eigen(format!("inverse iteration did not settle in {MAX_ITER} steps (Λ ≈ {lambda:e})")))
}

/// α_lin = Λ₁/(p − 1), which is (N−4)Λ₁/8 at the critical exponent.
pub fn linear_stability_alpha(op: &DiscreteOperator) -> Result<f64> {
    let mode = first_neumann_mode(op)?;
    Ok(mode.lambda1 / (op.problem().exponent_p() - 1.0))
}
