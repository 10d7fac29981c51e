//! α-bisection on the constant/nonconstant flip and the integral balance of solutions.

use serde::Serialize;

use super::eigen::first_neumann_mode;
use super::flow::{minimize_dofs, perturbed_constant, Classification, FlowOptions, MinimizeResult};
use super::operator::assemble_operator;
use super::BallProblem;
use crate::error::{domain, Error, Result};

/// Amplitude of the eigenfield perturbation that seeds every classification.
pub const SEED_AMPLITUDE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub alpha: f64,
    pub classification: Classification,
    pub deviation: f64,
    pub q: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub alpha_star_bracket: (f64, f64),
    pub alpha_lin: f64,
    pub alpha_bar: f64,
    pub lambda1: f64,
    /// Whether the bracket lies in (0, ᾱ].
    pub within_alpha_bar: bool,
    /// Every classification performed, in evaluation order.
    pub points: Vec<ScanPoint>,
}

/// Bisects the classification of the flow started at u₁ + 1e−2·u₁φ₁ between `alpha_lo` and `alpha_hi`.
pub fn threshold_scan(
    problem: &BallProblem,
    alpha_lo: f64,
    alpha_hi: f64,
    bisection_tol: f64,
    opts: &FlowOptions,
) -> Result<ThresholdResult> {
    if !(alpha_lo > 0.0 && alpha_lo < alpha_hi) {
        return domain(format!("need 0 < alpha_lo < alpha_hi, got ({alpha_lo}, {alpha_hi})"));
    }
    if !(bisection_tol > 0.0) {
        return domain("bisection tolerance must be positive");
    }
    // the pencil does not involve α
    let mode = first_neumann_mode(&assemble_operator(problem)?)?;
    let alpha_lin = mode.lambda1 / (problem.exponent_p() - 1.0);
    let alpha_bar = problem.alpha_bar()?;

    let mut points = Vec::new();
    let mut classify = |alpha: f64| -> Result<Classification> {
        let p = problem.with_alpha(alpha)?;
        let op = assemble_operator(&p)?;
        let init = perturbed_constant(&op, &mode.eigenfield, SEED_AMPLITUDE);
        let r = minimize_dofs(&op, &init, opts)?;
        points.push(ScanPoint {
            alpha,
            classification: r.classification,
            deviation: r.deviation,
            q: r.breakdown.q,
            converged: r.converged,
            iterations: r.iterations,
        });
        Ok(r.classification)
    };

    let at_lo = classify(alpha_lo)?;
    let at_hi = classify(alpha_hi)?;
    if at_lo != Classification::Constant || at_hi != Classification::Nonconstant {
        return Err(Error::Bracketing(format!(
            "classification is {} at α = {alpha_lo} and {} at α = {alpha_hi}",
            at_lo.label(),
            at_hi.label()
        )));
    }
    let (mut lo, mut hi) = (alpha_lo, alpha_hi);
    while hi - lo > bisection_tol {
        let mid = 0.5 * (lo + hi);
        match classify(mid)? {
            Classification::Constant => lo = mid,
            Classification::Nonconstant => hi = mid,
        }
    }
    Ok(ThresholdResult {
        alpha_star_bracket: (lo, hi),
        alpha_lin,
        alpha_bar,
        lambda1: mode.lambda1,
        within_alpha_bar: hi <= alpha_bar,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalanceReport {
    /// α∫u.
    pub linear: f64,
    /// ∫u^p.
    pub nonlinear: f64,
    /// |α∫u − ∫u^p|/(α∫u).
    pub defect: f64,
    /// α^{p/(p−1)}|B_R|.
    pub bound: f64,
    /// bound − α∫u.
    pub slack: f64,
}

/// Integrating the equation against 1 gives α∫u = ∫u^p; Hölder then bounds both by α^{p/(p−1)}|B_R|.
pub fn balance_check(result: &MinimizeResult, problem: &BallProblem) -> Result<BalanceReport> {
    if !result.converged {
        return Err(Error::NotApplicable("the flow did not converge".into()));
    }
    if result.field.grid != *problem.grid() {
        return domain("result lives on a different grid");
    }
    let op = assemble_operator(problem)?;
    let u = op.dofs_from_parts(&result.field.values, &result.slopes);
    if op.min_value(&u) < 0.0 {
        return Err(Error::NotApplicable("field changes sign".into()));
    }
    let omega = problem.dims().sphere_area();
    let alpha = problem.alpha();
    let p = problem.exponent_p();
    let linear = alpha * omega * op.integral(&u);
    let nonlinear = omega * op.power_integral(&u, p);
    let bound = alpha.powf(p / (p - 1.0)) * problem.volume();
    Ok(BalanceReport {
        linear,
        nonlinear,
        defect: (linear - nonlinear).abs() / linear,
        bound,
        slack: bound - linear,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rayleigh::RadialField;
    use crate::special::DimensionParams;

    fn problem(alpha: f64) -> BallProblem {
        BallProblem::new(DimensionParams::new(6).unwrap(), 1.0, alpha, 129).unwrap()
    }

    #[test]
    fn constant_saturates_bound() {
        for alpha in [0.1, 3.0, 400.0] {
            let p = problem(alpha);
            let init = RadialField::constant(p.grid().clone(), p.constant_solution()).unwrap();
            let r = super::super::minimize_quotient(&p, &init, &FlowOptions::default()).unwrap();
            let b = balance_check(&r, &p).unwrap();
            assert!(b.defect < 1e-12);
            assert!(b.slack.abs() <= 1e-10 * b.bound, "{}", b.slack / b.bound);
        }
    }

    #[test]
    fn sign_change_not_applicable() {
        let p = problem(1.0);
        let mut r = super::super::minimize_quotient(
            &p,
            &RadialField::constant(p.grid().clone(), p.constant_solution()).unwrap(),
            &FlowOptions::default(),
        )
        .unwrap();
        r.field.values[3] = -1.0;
        r.slopes[3] = 0.0;
        assert!(matches!(balance_check(&r, &p), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn bracketing_error_when_ends_agree() {
        let p = problem(1.0);
        let err = threshold_scan(&p, 1.0, 2.0, 0.1, &FlowOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Bracketing(_)));
    }
}
