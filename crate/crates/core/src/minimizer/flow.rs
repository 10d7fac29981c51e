//! Preconditioned normalized gradient flow for Q_α over radial fields.
//!
//! With the constraint G(u) = ∫|u|^q r^{N−1} = 1 (q = p + 1) the Euler–Lagrange
//! residual is g = S u − μ F(u), F(u)_a = ∫|u|^{q−2}u φ_a r^{N−1}, μ = uᵀSu. The step
//! direction is d = −S⁻¹g = −u + μ S⁻¹F(u), the step length is found by Armijo
//! backtracking on Q, and the iterate is rescaled back onto G = 1.

use serde::Serialize;

use super::operator::{assemble_operator, DiscreteOperator};
use super::BallProblem;
use crate::error::{domain, Result};
use crate::rayleigh::{QuotientBreakdown, RadialField};

/// Deviation above which a field counts as nonconstant.
pub const CLASSIFY_THRESHOLD: f64 = 1e-3;

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;
// Q is evaluated in floating point; decreases below this relative size are noise
const ROUNDOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Constant,
    Nonconstant,
}

impl Classification {
    pub fn from_deviation(deviation: f64) -> Self {
        if deviation > CLASSIFY_THRESHOLD {
            Self::Nonconstant
        } else {
            Self::Constant
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Constant => "CONSTANT",
            Self::Nonconstant => "NONCONSTANT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowOptions {
    /// Largest step tried; each accepted step lets the next try start at twice its size.
    pub max_step: f64,
    /// Stop when √(dᵀSd / uᵀSu) falls to this value.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            max_step: 1.0,
            tol: 1e-10,
            max_iter: 50_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizeResult {
    /// Nodal values of the stationary point, rescaled to solve the discrete equation.
    pub field: RadialField,
    /// Nodal slopes u′(r_i) of the same field.
    pub slopes: Vec<f64>,
    pub breakdown: QuotientBreakdown,
    pub q_init: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub classification: Classification,
    /// Weighted ‖u − ū‖/‖ū‖.
    pub deviation: f64,
    /// Lagrange multiplier μ at the last iterate (μ = Q when p is critical).
    pub multiplier: f64,
    /// Q after every accepted step, starting with the initial value.
    #[serde(skip)]
    pub history: Vec<f64>,
}

/// Degrees of freedom of u₁(1 + amplitude·φ), with φ the eigenfield of [`first_neumann_mode`](super::first_neumann_mode).
pub fn perturbed_constant(op: &DiscreteOperator, eigenfield: &[f64], amplitude: f64) -> Vec<f64> {
    let c = op.problem().constant_solution();
    op.constant_dofs(c)
        .iter()
        .zip(eigenfield)
        .map(|(u, v)| u + c * amplitude * v)
        .collect()
}

/// Runs the flow from nodal values `init` (slopes by centred differences).
/// Non-convergence is reported through `converged`, not as an error.
pub fn minimize_quotient(problem: &BallProblem, init: &RadialField, opts: &FlowOptions) -> Result<MinimizeResult> {
    if init.grid != *problem.grid() {
        return domain("initial field lives on a different grid");
    }
    let op = assemble_operator(problem)?;
    let dofs = op.dofs_from_nodal(&init.values);
    minimize_dofs(&op, &dofs, opts)
}

/// Runs the flow from Hermite degrees of freedom.
pub fn minimize_dofs(op: &DiscreteOperator, init: &[f64], opts: &FlowOptions) -> Result<MinimizeResult> {
    let problem = op.problem();
    if init.len() != op.ndof() {
        return domain(format!("expected {} degrees of freedom, got {}", op.ndof(), init.len()));
    }
    if init.iter().all(|v| *v == 0.0) {
        return domain("initial field must not vanish identically");
    }
    if !(opts.tol > 0.0) || !(opts.max_step > 0.0) {
        return domain("flow tolerance and step must be positive");
    }
    let q_exp = problem.exponent_p() + 1.0;

    let normalise = |u: &mut Vec<f64>| {
        let g = op.power_integral(u, q_exp);
        let s = g.powf(-1.0 / q_exp);
        u.iter_mut().for_each(|v| *v *= s);
    };
    let quotient = |u: &[f64]| op.energy(u) / op.power_integral(u, q_exp).powf(2.0 / q_exp);

    let mut u = init.to_vec();
    normalise(&mut u);
    let q_init = quotient(&u);
    let mut q_now = q_init;
    let mut history = vec![q_init];
    let mut step = opts.max_step;
    let mut residual = f64::INFINITY;
    let mut multiplier = q_now;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let su = op.full_stiffness(&u);
        let energy: f64 = su.iter().zip(&u).map(|(a, b)| a * b).sum();
        let nonlinear = op.power_load(&u, q_exp);
        multiplier = energy;
        let w = op.solve_full(&nonlinear);
        let d: Vec<f64> = u.iter().zip(&w).map(|(a, b)| energy * b - a).collect();
        // S d = μF(u) − S u
        let dsd: f64 = d
            .iter()
            .zip(nonlinear.iter().zip(&su))
            .map(|(di, (nl, s))| di * (energy * nl - s))
            .sum();
        residual = (dsd.max(0.0) / energy).sqrt();
        if residual <= opts.tol {
            converged = true;
            break;
        }
        iterations += 1;

        // ∇Q·d = −2 dᵀSd on the constraint surface
        let mut tau = step;
        let accepted = loop {
            let trial: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + tau * b).collect();
            let q_trial = quotient(&trial);
            if q_trial.is_finite() && q_trial <= q_now - ARMIJO * tau * 2.0 * dsd + ROUNDOFF * q_now {
                break Some((trial, q_trial));
            }
            tau *= 0.5;
            if tau < MIN_STEP {
                break None;
            }
        };
        match accepted {
            Some((mut trial, q_trial)) => {
                normalise(&mut trial);
                u = trial;
                q_now = q_trial;
                history.push(q_trial);
                step = (2.0 * tau).min(opts.max_step);
            }
            None => break,
        }
    }

    // rescale onto the solution branch: v = μ^{1/(p−1)} u solves S v = F(v)
    let scale = if multiplier > 0.0 {
        multiplier.powf(1.0 / (problem.exponent_p() - 1.0))
    } else {
        1.0
    };
    let values: Vec<f64> = u.iter().map(|v| v * scale).collect();
    // the internal quotient omits |S^{N−1}|
    let omega_factor = problem.dims().sphere_area().powf(1.0 - 2.0 / q_exp);
    let deviation = op.deviation(&values);
    let breakdown = op.breakdown(&values);
    Ok(MinimizeResult {
        field: RadialField::new(problem.grid().clone(), op.nodal_values(&values))?,
        slopes: op.nodal_slopes(&values),
        breakdown,
        q_init: q_init * omega_factor,
        iterations,
        converged,
        residual,
        classification: Classification::from_deviation(deviation),
        deviation,
        multiplier,
        history: history.into_iter().map(|q| q * omega_factor).collect(),
    })
}
