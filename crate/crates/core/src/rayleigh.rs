//! The functional J(u) = ∫(|Δu|² + |∇u|² + αu²), the Rayleigh quotient
//! Q_α(u) = J(u)/‖u‖²_{2*}, and the ε-asymptotics of the chart-transported bubbles.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bubble::{BubbleParams, CutoffParams, GluedBubbleParams, GLUE_RADIUS};
use crate::chart::CurvatureModel;
use crate::error::{domain, Error, Result};
use crate::quadrature::engine::gauss_kronrod_21;
use crate::quadrature::{
    half_ball_critical_norm, i_terms, j_integrals, radial_integral_with_breaks, scale_breaks, ITerms,
    QuadratureSpec, RadialInterval,
};
use crate::special::DimensionParams;

/// Uniform radial grid on [0, R].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    radius: f64,
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub const MIN_NODES: usize = 16;

    pub fn uniform(radius: f64, n: usize) -> Result<Self> {
        if n < Self::MIN_NODES {
            return Err(Error::Grid(format!("need at least {} nodes, got {n}", Self::MIN_NODES)));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Grid(format!("radius must be positive and finite, got {radius}")));
        }
        let h = radius / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        nodes[n - 1] = radius;
        Ok(Self { radius, nodes })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        self.radius / (self.nodes.len() - 1) as f64
    }
}

/// Nodal values of a radial function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialField {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("field values must be finite");
        }
        Ok(Self { grid, values })
    }

    pub fn sample(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: RadialGrid, c: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![c; n])
    }
}

/// The pieces of J(u) and Q_α(u), each an N-dimensional integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotientBreakdown {
    pub lap2: f64,
    pub grad2: f64,
    pub l2: f64,
    pub lp: f64,
    pub alpha: f64,
    pub j: f64,
    pub q: f64,
}

impl QuotientBreakdown {
    pub fn from_parts(dims: DimensionParams, alpha: f64, lap2: f64, grad2: f64, l2: f64, lp: f64) -> Self {
        Self::with_exponent(dims.two_star(), alpha, lap2, grad2, l2, lp)
    }

    /// As [`Self::from_parts`] with `lp` = ∫|u|^q for a general exponent q.
    pub fn with_exponent(q_exp: f64, alpha: f64, lap2: f64, grad2: f64, l2: f64, lp: f64) -> Self {
        let j = lap2 + grad2 + alpha * l2;
        let q = j / lp.powf(2.0 / q_exp);
        Self {
            lap2,
            grad2,
            l2,
            lp,
            alpha,
            j,
            q,
        }
    }

    /// Each integral multiplied by `factor` (e.g. ½ for a half-space restriction).
    pub fn scaled(&self, dims: DimensionParams, factor: f64) -> Self {
        Self::from_parts(
            dims,
            self.alpha,
            factor * self.lap2,
            factor * self.grad2,
            factor * self.l2,
            factor * self.lp,
        )
    }
}

/// Finite-difference weights for derivatives 0..=m at z from the nodes xs.
pub fn fd_weights(z: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// (u′, u″) at every node: centred five-point stencils with even reflection
/// through r = 0, six-point one-sided stencils at the last two nodes.
pub fn radial_derivatives(u: &RadialField) -> (Vec<f64>, Vec<f64>) {
    let n = u.grid.len();
    let h = u.grid.spacing();
    let value_at = |k: isize| u.values[k.unsigned_abs()];
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    let centred = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
    for i in 0..n {
        if i + 2 < n {
            let base = i as isize - 2;
            for (k, (w1, w2)) in centred[1].iter().zip(&centred[2]).enumerate() {
                let v = value_at(base + k as isize);
                d1[i] += w1 * v;
                d2[i] += w2 * v;
            }
            d1[i] /= h;
            d2[i] /= h * h;
        } else {
            let start = n - 6;
            let xs: Vec<f64> = (start..n).map(|k| k as f64 - i as f64).collect();
            let w = fd_weights(0.0, &xs, 2);
            for (k, idx) in (start..n).enumerate() {
                d1[i] += w[1][k] * u.values[idx];
                d2[i] += w[2][k] * u.values[idx];
            }
            d1[i] /= h;
            d2[i] /= h * h;
        }
    }
    (d1, d2)
}

/// Discrete radial Laplacian u″ + (N−1)u′/r, with N·u″(0) at the origin.
pub fn radial_laplacian(u: &RadialField, n_dim: u32) -> Vec<f64> {
    let (d1, d2) = radial_derivatives(u);
    let nm1 = f64::from(n_dim) - 1.0;
    u.grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| if i == 0 { f64::from(n_dim) * d2[0] } else { d2[i] + nm1 / r * d1[i] })
        .collect()
}

/// Weights w with Σ w_i F(r_i) ≈ ∫₀ᴿ F(r) r^{N−1} dr, from local cubic interpolation
/// of F integrated exactly against r^{N−1}.
pub fn radial_weights(grid: &RadialGrid, n_dim: u32) -> Vec<f64> {
    let n = grid.len();
    let x = grid.nodes();
    let power = n_dim as i32 - 1;
    let mut w = vec![0.0; n];
    for cell in 0..n - 1 {
        let start = cell.saturating_sub(1).min(n - 4);
        let idx = [start, start + 1, start + 2, start + 3];
        for (a, &ia) in idx.iter().enumerate() {
            let basis = |r: f64| {
                let mut p = r.powi(power);
                for (b, &ib) in idx.iter().enumerate() {
                    if b != a {
                        p *= (r - x[ib]) / (x[ia] - x[ib]);
                    }
                }
                p
            };
            let (v, _) = gauss_kronrod_21(&basis, x[cell], x[cell + 1]).expect("polynomial integrand is finite");
            w[ia] += v;
        }
    }
    w
}

/// ∫|Δu|², ∫|∇u|², ∫u², ∫|u|^{2*} over B_R ⊂ ℝᴺ, and J, Q at the given α.
pub fn field_norms(u: &RadialField, dims: DimensionParams, alpha: f64) -> Result<QuotientBreakdown> {
    if !(alpha > 0.0) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    if u.grid.len() < RadialGrid::MIN_NODES {
        return Err(Error::Grid("grid too coarse".into()));
    }
    let n_dim = dims.n();
    let w = radial_weights(&u.grid, n_dim);
    let (d1, _) = radial_derivatives(u);
    let lap = radial_laplacian(u, n_dim);
    let q = dims.two_star();
    let omega = dims.sphere_area();
    let sum = |f: &dyn Fn(usize) -> f64| omega * (0..w.len()).map(|i| w[i] * f(i)).sum::<f64>();
    let lap2 = sum(&|i| lap[i] * lap[i]);
    let grad2 = sum(&|i| d1[i] * d1[i]);
    let l2 = sum(&|i| u.values[i] * u.values[i]);
    let lp = sum(&|i| u.values[i].abs().powf(q));
    Ok(QuotientBreakdown::from_parts(dims, alpha, lap2.max(0.0), grad2.max(0.0), l2, lp))
}

/// Q_α(z_ε) over ℝᴺ₊ with its breakdown (each integral half the full-space value).
pub fn halfspace_bubble_breakdown(
    dims: DimensionParams,
    alpha: f64,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<QuotientBreakdown> {
    if !(eps > 0.0 && eps <= 0.25) {
        return domain(format!("eps must lie in (0, 1/4], got {eps}"));
    }
    if !(alpha > 0.0) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    let z = GluedBubbleParams::new(dims, eps)?;
    let n = dims.n();
    let q = dims.two_star();
    let omega = dims.sphere_area();
    let mut breaks = scale_breaks(eps, GLUE_RADIUS);
    breaks.push(GLUE_RADIUS);
    let interval = RadialInterval::Ball(1.0);
    let int = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
        Ok(omega * radial_integral_with_breaks(f, n, interval, &breaks, spec)?.value)
    };
    let lap2 = int(&|r| z.laplacian(r).powi(2))?;
    let grad2 = int(&|r| z.radial_derivative(r).powi(2))?;
    let l2 = int(&|r| z.value(r).powi(2))?;
    let lp = int(&|r| z.value(r).abs().powf(q))?;
    Ok(QuotientBreakdown::from_parts(dims, alpha, lap2, grad2, l2, lp).scaled(dims, 0.5))
}

/// Q_α(z_ε) over ℝᴺ₊; tends to S/2^{4/N} from above as ε → 0.
pub fn halfspace_bubble_quotient(dims: DimensionParams, alpha: f64, eps: f64) -> Result<f64> {
    Ok(halfspace_bubble_breakdown(dims, alpha, eps, &QuadratureSpec::default())?.q)
}

/// (∫_{ℝᴺ}|Δu_ε|², ∫_{ℝᴺ}|u_ε|^{2*}); both equal S^{N/4}.
pub fn full_space_bubble_norms(dims: DimensionParams, eps: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let u = BubbleParams::new(dims, eps)?;
    let n = dims.n();
    let q = dims.two_star();
    let omega = dims.sphere_area();
    let breaks = scale_breaks(eps, 1e3 * eps);
    let lap2 = radial_integral_with_breaks(|r| u.laplacian(r).powi(2), n, RadialInterval::Whole, &breaks, spec)?;
    let lp = radial_integral_with_breaks(|r| u.value(r).powf(q), n, RadialInterval::Whole, &breaks, spec)?;
    Ok((omega * lap2.value, omega * lp.value))
}

/// Gauge functions for [`asymptotic_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FitModel {
    /// value ≈ a + b·ε
    Linear,
    /// value ≈ a + b·ε·ln(1/ε) + c·ε
    LinearLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub intercept: f64,
    /// Coefficient of ε (Linear) or of ε·ln(1/ε) (LinearLog).
    pub slope: f64,
    /// Coefficient of the ε companion term in the LinearLog model.
    pub companion: Option<f64>,
    /// ‖residual‖₂ / ‖values‖₂.
    pub residual: f64,
}

/// Ordinary least squares on column-scaled basis functions of ε.
pub fn least_squares(eps: &[f64], values: &[f64], basis: &[&dyn Fn(f64) -> f64]) -> Result<(Vec<f64>, f64)> {
    let m = eps.len();
    let k = basis.len();
    if m != values.len() {
        return Err(Error::Fit("sample and value counts differ".into()));
    }
    if m < k.max(3) {
        return Err(Error::Fit(format!("need at least {} samples, got {m}", k.max(3))));
    }
    let mut sorted = eps.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[1] <= w[0]) || sorted[0] <= 0.0 {
        return Err(Error::Fit("eps values must be positive and distinct".into()));
    }
    let mut a = DMatrix::from_fn(m, k, |i, j| basis[j](eps[i]));
    let scales: Vec<f64> = (0..k).map(|j| a.column(j).norm()).collect();
    if scales.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::Fit("a basis function vanishes on every sample".into()));
    }
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::Fit("basis is collinear on the samples".into()));
    }
    let b = DVector::from_column_slice(values);
    let x = svd
        .solve(&b, 1e-14 * smax)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let resid = (&a * &x - &b).norm();
    let bnorm = b.norm();
    let coeffs = x.iter().zip(&scales).map(|(c, s)| c / s).collect();
    Ok((coeffs, if bnorm > 0.0 { resid / bnorm } else { resid }))
}

/// Fit value ≈ intercept + slope·φ(ε) (plus an ε companion term for LinearLog).
pub fn asymptotic_fit(samples: &[(f64, f64)], model: FitModel) -> Result<FitResult> {
    let eps: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let one = |_: f64| 1.0;
    let lin = |e: f64| e;
    let log = |e: f64| e * (1.0 / e).ln();
    match model {
        FitModel::Linear => {
            let (c, residual) = least_squares(&eps, &values, &[&one, &lin])?;
            Ok(FitResult {
                intercept: c[0],
                slope: c[1],
                companion: None,
                residual,
            })
        }
        FitModel::LinearLog => {
            let (c, residual) = least_squares(&eps, &values, &[&one, &log, &lin])?;
            Ok(FitResult {
                intercept: c[0],
                slope: c[1],
                companion: Some(c[2]),
                residual,
            })
        }
    }
}

/// `count` log-spaced samples in [lo, hi].
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// The slope-extraction window: 8 log-spaced ε in [1e−3, 1e−2].
pub fn fit_window() -> Vec<f64> {
    log_spaced(1e-3, 1e-2, 8)
}

/// Chart radius r0 used by the curvature sweeps.
pub const SWEEP_R0: f64 = 1.0;

/// One ε-sample of the curvature expansion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub eps: f64,
    pub terms: ITerms,
    /// Flat part of the half-ball critical norm.
    pub lp_flat: f64,
    /// First-order curvature part of the half-ball critical norm.
    pub lp_tilt: f64,
}

pub fn curvature_sweep(
    dims: DimensionParams,
    model: &CurvatureModel,
    r0: f64,
    eps: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<CurvatureSample>> {
    eps.iter()
        .map(|&e| {
            let terms = i_terms(dims, e, r0, model, spec)?;
            let (lp_flat, lp_tilt) = half_ball_critical_norm(dims, e, r0, model, spec)?;
            Ok(CurvatureSample {
                eps: e,
                terms,
                lp_flat,
                lp_tilt,
            })
        })
        .collect()
}

/// A fitted coefficient next to its predicted value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeCheck {
    pub fit: FitResult,
    pub expected: f64,
}

impl SlopeCheck {
    pub fn relative_error(&self) -> f64 {
        ((self.fit.slope - self.expected) / self.expected).abs()
    }
}

/// Fitted ε-slopes of I₂+I₃, I₄ and the critical norm against their predictions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureSlopes {
    pub n: u32,
    pub h: f64,
    /// I₁ intercept against S^{N/4}/2.
    pub i1: SlopeCheck,
    /// `None` for N = 5, where I₂ and I₃ are not separately finite in the limit.
    pub i23: Option<SlopeCheck>,
    /// Linear slope for N ≥ 6; ε·ln(1/ε) coefficient for N = 5.
    pub i4: SlopeCheck,
    pub lp: SlopeCheck,
    /// Total ∫|Δψ_ε|² slope against d_N H (N−2)(J₁ + 4J₂/(N−1)).
    pub composite: Option<SlopeCheck>,
}

/// Fits for an ε-sweep from [`curvature_sweep`].
pub fn curvature_slopes(
    dims: DimensionParams,
    model: &CurvatureModel,
    samples: &[CurvatureSample],
    spec: &QuadratureSpec,
) -> Result<CurvatureSlopes> {
    let n = dims.n();
    let nf = dims.nf();
    let h = model.h();
    let j = j_integrals(n, spec)?;
    let dn = dims.d_n();
    let pick = |f: &dyn Fn(&CurvatureSample) -> f64| -> Vec<(f64, f64)> {
        samples.iter().map(|s| (s.eps, f(s))).collect()
    };
    let i1_fit = asymptotic_fit(&pick(&|s| s.terms.i1), FitModel::Linear)?;
    let i1 = SlopeCheck {
        fit: FitResult {
            slope: i1_fit.intercept,
            ..i1_fit
        },
        expected: 0.5 * dims.sobolev_energy(),
    };
    let lp = SlopeCheck {
        fit: asymptotic_fit(&pick(&|s| s.lp_flat + s.lp_tilt), FitModel::Linear)?,
        expected: -dims.gamma_n().powf(dims.two_star()) * (nf - 1.0) * h * j.j3,
    };
    if n == 5 {
        let i4 = SlopeCheck {
            fit: asymptotic_fit(&pick(&|s| s.terms.i4), FitModel::LinearLog)?,
            expected: -8.0 * std::f64::consts::PI.powi(2) * 105f64.powf(0.25) * h,
        };
        return Ok(CurvatureSlopes {
            n,
            h,
            i1,
            i23: None,
            i4,
            lp,
            composite: None,
        });
    }
    let j2 = j.j2()?;
    let i23 = SlopeCheck {
        fit: asymptotic_fit(&pick(&|s| s.terms.i2 + s.terms.i3), FitModel::Linear)?,
        expected: -dn * h * (nf - 2.0) * j.j1,
    };
    let i4 = SlopeCheck {
        fit: asymptotic_fit(&pick(&|s| s.terms.i4), FitModel::Linear)?,
        expected: -4.0 * dn * (nf - 2.0) / (nf - 1.0) * h * j2,
    };
    let composite = SlopeCheck {
        fit: asymptotic_fit(&pick(&|s| s.terms.sum()), FitModel::Linear)?,
        expected: -dn * h * (nf - 2.0) * (j.j1 + 4.0 * j2 / (nf - 1.0)),
    };
    Ok(CurvatureSlopes {
        n,
        h,
        i1,
        i23: Some(i23),
        i4,
        lp,
        composite: Some(composite),
    })
}

/// d_N(N−2)(J₁ + 4J₂/(N−1)) − ((N−4)(N−1)/N) γ_N^{2*} J₃, the bracket whose sign decides
/// whether boundary concentration lowers the quotient below S/2^{4/N}.
pub fn curvature_bracket(dims: DimensionParams, spec: &QuadratureSpec) -> Result<f64> {
    let nf = dims.nf();
    let j = j_integrals(dims.n(), spec)?;
    Ok(dims.d_n() * (nf - 2.0) * (j.j1 + 4.0 * j.j2()? / (nf - 1.0))
        - (nf - 4.0) * (nf - 1.0) / nf * dims.gamma_n().powf(dims.two_star()) * j.j3)
}

/// Order class ε^k or ε^k·ln(1/ε).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderClass {
    pub power: u32,
    pub log: bool,
}

impl OrderClass {
    pub fn label(&self) -> String {
        if self.log {
            format!("eps^{} log(1/eps)", self.power)
        } else {
            format!("eps^{}", self.power)
        }
    }
}

/// Expected orders (∫|∇ψ_ε|², ∫|ψ_ε|²) in dimension N.
pub fn expected_secondary_orders(n: u32) -> (OrderClass, OrderClass) {
    let grad = match n {
        5 => OrderClass { power: 1, log: false },
        6 => OrderClass { power: 2, log: true },
        _ => OrderClass { power: 2, log: false },
    };
    let l2 = match n {
        5..=7 => OrderClass {
            power: n - 4,
            log: false,
        },
        8 => OrderClass { power: 4, log: true },
        _ => OrderClass { power: 4, log: false },
    };
    (grad, l2)
}

/// Empirical order of an ε-sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormOrder {
    /// Free log-log exponent, corrected for the logarithm when the log model wins.
    pub exponent: f64,
    /// Uncorrected log-log exponent.
    pub raw_exponent: f64,
    pub class: OrderClass,
    /// Relative residual of v/ε^k ≈ a + bε.
    pub power_residual: f64,
    /// Relative residual of v/ε^k ≈ a·ln(1/ε) + b.
    pub log_residual: f64,
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let one = |_: f64| 1.0;
    let id = |x: f64| x;
    // the basis is evaluated on ln ε, which may be negative; shift into (0, ∞) for the distinctness check
    let shift = xs.iter().fold(f64::INFINITY, |m, x| m.min(*x)) - 1.0;
    let xs: Vec<f64> = xs.iter().map(|x| x - shift).collect();
    let (c, _) = least_squares(&xs, ys, &[&one, &id])?;
    Ok(c[1])
}

/// Classify an ε-sweep v(ε) as ε^k or ε^k·ln(1/ε).
pub fn classify_order(eps: &[f64], values: &[f64]) -> Result<NormOrder> {
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("order classification needs positive values".into()));
    }
    let lx: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let raw = loglog_slope(&lx, &ly)?;
    let power = raw.round().max(0.0) as u32;
    let scaled: Vec<f64> = eps.iter().zip(values).map(|(e, v)| v / e.powi(power as i32)).collect();
    let one = |_: f64| 1.0;
    let lin = |e: f64| e;
    let log = |e: f64| (1.0 / e).ln();
    let (_, power_residual) = least_squares(eps, &scaled, &[&one, &lin])?;
    let (_, log_residual) = least_squares(eps, &scaled, &[&log, &one])?;
    let is_log = log_residual < power_residual;
    let exponent = if is_log {
        let corrected: Vec<f64> = ly.iter().zip(eps).map(|(l, e)| l - (1.0 / e).ln().ln()).collect();
        loglog_slope(&lx, &corrected)?
    } else {
        raw
    };
    Ok(NormOrder {
        exponent,
        raw_exponent: raw,
        class: OrderClass { power, log: is_log },
        power_residual,
        log_residual,
    })
}

/// ε-sweep values of (∫_{ℝᴺ₊}|∇(ηu_ε)|², ∫_{ℝᴺ₊}(ηu_ε)²) with η the cut-off of radius r0.
pub fn secondary_norms(
    dims: DimensionParams,
    eps: f64,
    r0: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let u = BubbleParams::new(dims, eps)?;
    let cut = CutoffParams::new(r0)?;
    let n = dims.n();
    let half_omega = 0.5 * dims.sphere_area();
    let upper = cut.support_radius();
    let mut breaks = scale_breaks(eps, upper);
    breaks.push(0.25 * r0);
    let interval = RadialInterval::Ball(upper);
    let grad = radial_integral_with_breaks(
        |r| {
            let (e, de, _) = cut.eval(r);
            (e * u.radial_derivative(r) + de * u.value(r)).powi(2)
        },
        n,
        interval,
        &breaks,
        spec,
    )?;
    let l2 = radial_integral_with_breaks(|r| (cut.value(r) * u.value(r)).powi(2), n, interval, &breaks, spec)?;
    Ok((half_omega * grad.value, half_omega * l2.value))
}

/// Empirical orders of the gradient and L² norms over the sampled ε.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondaryOrders {
    pub n: u32,
    pub eps: Vec<f64>,
    pub grad2: Vec<f64>,
    pub l2: Vec<f64>,
    pub grad2_order: NormOrder,
    pub l2_order: NormOrder,
}

pub fn secondary_norm_orders(dims: DimensionParams, eps: &[f64], spec: &QuadratureSpec) -> Result<SecondaryOrders> {
    let mut grad2 = Vec::with_capacity(eps.len());
    let mut l2 = Vec::with_capacity(eps.len());
    for &e in eps {
        let (g, l) = secondary_norms(dims, e, SWEEP_R0, spec)?;
        grad2.push(g);
        l2.push(l);
    }
    Ok(SecondaryOrders {
        n: dims.n(),
        eps: eps.to_vec(),
        grad2_order: classify_order(eps, &grad2)?,
        l2_order: classify_order(eps, &l2)?,
        grad2,
        l2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ball_volume;
    use proptest::prelude::*;

    fn dims(n: u32) -> DimensionParams {
        DimensionParams::new(n).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(RadialGrid::uniform(1.0, 15).is_err());
        assert!(RadialGrid::uniform(0.0, 32).is_err());
        let g = RadialGrid::uniform(2.0, 16).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(*g.nodes().last().unwrap(), 2.0);
        let bad = RadialField::new(g, vec![0.0; 3]);
        assert!(bad.is_err());
    }

    #[test]
    fn fornberg_reproduces_classic_stencils() {
        let w = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let want1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let want2 = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        for k in 0..5 {
            assert!((w[1][k] - want1[k]).abs() < 1e-15);
            assert!((w[2][k] - want2[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn weights_integrate_polynomials() {
        let g = RadialGrid::uniform(1.5, 37).unwrap();
        for n in [5u32, 6, 9] {
            let w = radial_weights(&g, n);
            for k in 0..=3 {
                let got: f64 = g.nodes().iter().zip(&w).map(|(r, w)| w * r.powi(k)).sum();
                let want = 1.5f64.powi(n as i32 + k) / f64::from(n as i32 + k);
                assert!((got - want).abs() < 1e-12 * want, "N={n} k={k}");
            }
        }
    }

    #[test]
    fn constant_field_norms() {
        let d = dims(6);
        let g = RadialGrid::uniform(1.3, 64).unwrap();
        let c = 0.7;
        let b = field_norms(&RadialField::constant(g, c).unwrap(), d, 2.5).unwrap();
        let vol = ball_volume(6, 1.3);
        assert!(b.lap2.abs() < 1e-20 && b.grad2.abs() < 1e-20);
        assert!((b.l2 - c * c * vol).abs() < 1e-12 * vol);
        assert!((b.lp - c.powi(6) * vol).abs() < 1e-12 * vol);
        let b1 = field_norms(&RadialField::constant(RadialGrid::uniform(1.3, 64).unwrap(), 1.0).unwrap(), d, 2.5)
            .unwrap();
        assert!((b1.q - 2.5 * vol.powf(4.0 / 6.0)).abs() < 1e-10 * b1.q);
        assert!((b1.j - (b1.lap2 + b1.grad2 + 2.5 * b1.l2)).abs() < 1e-12 * b1.j);
    }

    #[test]
    fn laplacian_is_fourth_order() {
        // u = cos(r) is even; Δu = −cos r − (N−1) sin r / r
        let n = 7u32;
        let mut errs = Vec::new();
        for nodes in [65, 129] {
            let g = RadialGrid::uniform(2.0, nodes).unwrap();
            let u = RadialField::sample(g.clone(), f64::cos).unwrap();
            let lap = radial_laplacian(&u, n);
            let mut e: f64 = 0.0;
            for (i, &r) in g.nodes().iter().enumerate() {
                let exact = if r == 0.0 { -f64::from(n) } else { -r.cos() - 6.0 * r.sin() / r };
                e = e.max((lap[i] - exact).abs());
            }
            errs.push(e);
        }
        let rate = (errs[0] / errs[1]).log2();
        assert!(rate > 3.5, "{errs:?} rate {rate}");
    }

    #[test]
    fn sampled_bubble_energy() {
        // ε = 0.5 on R = 8: compare with the adaptive-quadrature value of the same truncated integral
        let d = dims(6);
        let u = BubbleParams::new(d, 0.5).unwrap();
        let g = RadialGrid::uniform(8.0, 2049).unwrap();
        let field = RadialField::sample(g, |r| u.value(r)).unwrap();
        let b = field_norms(&field, d, 1.0).unwrap();
        let spec = QuadratureSpec::default();
        let trunc = d.sphere_area()
            * radial_integral_with_breaks(|r| u.laplacian(r).powi(2), 6, RadialInterval::Ball(8.0), &[0.5], &spec)
                .unwrap()
                .value;
        assert!((b.lap2 - trunc).abs() < 1e-2 * trunc);
        assert!((b.lap2 - d.sobolev_energy()).abs() < 1e-2 * d.sobolev_energy());
    }

    #[test]
    fn rescaling_laws() {
        // u_λ(x) = λ^{(N−4)/2} u(λx) maps the bubble at scale ε to the bubble at scale ε/λ
        let d = dims(7);
        let lambda = 2.0;
        let u = BubbleParams::new(d, 0.4).unwrap();
        let ul = BubbleParams::new(d, 0.4 / lambda).unwrap();
        let a = field_norms(
            &RadialField::sample(RadialGrid::uniform(6.0, 3001).unwrap(), |r| u.value(r)).unwrap(),
            d,
            1.0,
        )
        .unwrap();
        let b = field_norms(
            &RadialField::sample(RadialGrid::uniform(6.0 / lambda, 3001).unwrap(), |r| ul.value(r)).unwrap(),
            d,
            1.0,
        )
        .unwrap();
        assert!((b.lap2 / a.lap2 - 1.0).abs() < 1e-2);
        assert!((b.grad2 / a.grad2 - lambda.powi(-2)).abs() < 1e-2 * lambda.powi(-2));
        assert!((b.l2 / a.l2 - lambda.powi(-4)).abs() < 1e-2 * lambda.powi(-4));
    }

    #[test]
    fn full_space_norms_agree() {
        let spec = QuadratureSpec::default();
        for n in [5, 8] {
            let d = dims(n);
            for eps in [0.1, 1.0] {
                let (lap2, lp) = full_space_bubble_norms(d, eps, &spec).unwrap();
                let s = d.sobolev_energy();
                assert!((lap2 - s).abs() < 1e-8 * s && (lp - s).abs() < 1e-8 * s, "N={n} eps={eps}");
            }
        }
    }

    #[test]
    fn halfspace_quotient_limit() {
        let d = dims(6);
        let target = d.half_space_constant();
        let q: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&e| halfspace_bubble_quotient(d, 1.0, e).unwrap())
            .collect();
        assert!(q[0] > q[1] && q[1] > q[2] && q[2] > target);
        assert!((q[2] - target) < 0.02 * target);
        assert!(halfspace_bubble_quotient(d, 1.0, 0.3).is_err());
    }

    #[test]
    fn linear_fit_recovers_synthetic() {
        let eps = fit_window();
        let samples: Vec<(f64, f64)> = eps.iter().map(|&e| (e, 3.25 - 7.5 * e)).collect();
        let f = asymptotic_fit(&samples, FitModel::Linear).unwrap();
        assert!((f.intercept - 3.25).abs() < 1e-12);
        assert!((f.slope + 7.5).abs() < 1e-12 * 7.5 * 100.0);
        assert!(f.residual < 1e-14);
        let samples: Vec<(f64, f64)> = eps.iter().map(|&e| (e, 2.0 + 5.0 * e * (1.0 / e).ln() - 3.0 * e)).collect();
        let f = asymptotic_fit(&samples, FitModel::LinearLog).unwrap();
        assert!((f.slope - 5.0).abs() < 1e-9);
        assert!((f.companion.unwrap() + 3.0).abs() < 1e-8);
    }

    #[test]
    fn fit_rejects_degenerate() {
        assert!(asymptotic_fit(&[(1e-3, 1.0), (2e-3, 2.0)], FitModel::Linear).is_err());
        assert!(asymptotic_fit(&[(1e-3, 1.0), (1e-3, 2.0), (2e-3, 1.0)], FitModel::Linear).is_err());
    }

    #[test]
    fn order_classifier_on_synthetic_data() {
        let eps = fit_window();
        let v: Vec<f64> = eps.iter().map(|e| 2.0 * e * e * (1.0 + 0.3 * e)).collect();
        let o = classify_order(&eps, &v).unwrap();
        assert_eq!(o.class, OrderClass { power: 2, log: false });
        let v: Vec<f64> = eps.iter().map(|e| e.powi(4) * (1.0 / e).ln() * 3.0 + e.powi(4)).collect();
        let o = classify_order(&eps, &v).unwrap();
        assert_eq!(o.class, OrderClass { power: 4, log: true });
        assert!((o.exponent - 4.0).abs() < 0.2);
    }

    #[test]
    fn bracket_positive() {
        let spec = QuadratureSpec::default();
        for n in 6..=12 {
            assert!(curvature_bracket(dims(n), &spec).unwrap() > 0.0, "N={n}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn quotient_is_amplitude_free(c in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0]) {
            let d = dims(6);
            let g = RadialGrid::uniform(1.0, 64).unwrap();
            let u = RadialField::sample(g.clone(), |r| 1.0 + 0.3 * (std::f64::consts::PI * r).cos()).unwrap();
            let cu = RadialField::new(g, u.values.iter().map(|v| c * v).collect()).unwrap();
            let a = field_norms(&u, d, 3.0).unwrap();
            let b = field_norms(&cu, d, 3.0).unwrap();
            prop_assert!((a.q - b.q).abs() < 1e-12 * a.q);
        }
    }
}
