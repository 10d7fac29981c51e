//! Boundary-straightening chart for a quadratically osculating boundary.
//!
//! Near a boundary point placed at the origin, ∂Ω is the graph x_N = ρ(x′) with
//! ρ(x′) = Σ κ_j x_j², and the chart is
//!
//! ```text
//! Φ(y′, y_N) = (y′, ρ(y′)) − y_N ν(y′),   ν(y′) = (∇ρ(y′), −1)
//! ```
//!
//! so that Φ_j = y_j(1 − 2κ_j y_N) and Φ_N = ρ(y′) + y_N. In this model DΦ = Id + A
//! holds exactly; the unit-normal variant is kept for comparison only.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Which normal field the chart is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NormalMode {
    /// ν = (∇ρ, −1), not normalised.
    #[default]
    Graph,
    /// ν/|ν|.
    Unit,
}

/// Principal curvatures of the osculating quadric at the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureModel {
    n: u32,
    kappas: Vec<f64>,
    h: f64,
    chart_radius: f64,
    normal: NormalMode,
    warning: Option<String>,
}

impl CurvatureModel {
    /// Model in dimension N = kappas.len() + 1.
    pub fn new(kappas: Vec<f64>) -> Result<Self> {
        if kappas.is_empty() {
            return domain("at least one principal curvature is required");
        }
        if kappas.iter().any(|k| !k.is_finite()) {
            return domain(format!("curvatures must be finite: {kappas:?}"));
        }
        let n = kappas.len() as u32 + 1;
        let h = mean_curvature(&kappas);
        let kmax = kappas.iter().fold(0.0f64, |m, k| m.max(k.abs()));
        let warning = (h <= 0.0).then(|| {
            format!("mean curvature H = {h:e} is not positive; the boundary is not locally convex at the origin")
        });
        Ok(Self {
            n,
            kappas,
            h,
            chart_radius: 0.2 / kmax.max(1.0),
            normal: NormalMode::Graph,
            warning,
        })
    }

    /// All curvatures equal to `kappa`.
    pub fn uniform(n: u32, kappa: f64) -> Result<Self> {
        if n < 2 {
            return domain(format!("dimension must be at least 2, got {n}"));
        }
        Self::new(vec![kappa; n as usize - 1])
    }

    /// Osculating quadric of a sphere of radius R: ρ(x′) = |x′|²/(2R).
    pub fn ball(n: u32, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return domain(format!("radius must be positive, got {radius}"));
        }
        Self::uniform(n, 0.5 / radius)
    }

    pub fn with_normal(mut self, normal: NormalMode) -> Self {
        self.normal = normal;
        self
    }

    pub fn with_chart_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return domain(format!("chart radius must be positive, got {radius}"));
        }
        self.chart_radius = radius;
        Ok(self)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    /// H = (2/(N−1)) Σ κ_j.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn chart_radius(&self) -> f64 {
        self.chart_radius
    }

    pub fn normal(&self) -> NormalMode {
        self.normal
    }

    /// Set when H ≤ 0.
    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    fn check_point(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.n as usize {
            return domain(format!("expected a point in ℝ^{}, got length {}", self.n, y.len()));
        }
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(r <= self.chart_radius * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!(
                "|y| = {r:e} exceeds the chart radius {:e}",
                self.chart_radius
            )));
        }
        Ok(())
    }
}

/// (2/(N−1)) Σ κ_j.
pub fn mean_curvature(kappas: &[f64]) -> f64 {
    2.0 * kappas.iter().sum::<f64>() / kappas.len() as f64
}

/// ρ(x′) = Σ κ_j x_j².
pub fn rho_value(model: &CurvatureModel, xprime: &[f64]) -> Result<f64> {
    if xprime.len() != model.kappas.len() {
        return domain(format!(
            "expected {} tangential coordinates, got {}",
            model.kappas.len(),
            xprime.len()
        ));
    }
    let r = xprime.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(r <= model.chart_radius * (1.0 + 1e-12)) {
        return domain(format!("|x′| = {r:e} exceeds the chart radius"));
    }
    Ok(rho(model, xprime))
}

fn rho(model: &CurvatureModel, xprime: &[f64]) -> f64 {
    model.kappas.iter().zip(xprime).map(|(k, x)| k * x * x).sum()
}

/// Φ(y).
pub fn phi_map(model: &CurvatureModel, y: &[f64]) -> Result<Vec<f64>> {
    model.check_point(y)?;
    let m = model.kappas.len();
    let yn = y[m];
    let yp = &y[..m];
    let grad: Vec<f64> = model.kappas.iter().zip(yp).map(|(k, v)| 2.0 * k * v).collect();
    let scale = match model.normal {
        NormalMode::Graph => 1.0,
        NormalMode::Unit => 1.0 / (1.0 + grad.iter().map(|g| g * g).sum::<f64>()).sqrt(),
    };
    let mut x: Vec<f64> = yp.iter().zip(&grad).map(|(v, g)| v - yn * g * scale).collect();
    x.push(rho(model, yp) + yn * scale);
    Ok(x)
}

/// DΦ(y), analytic.
pub fn phi_jacobian(model: &CurvatureModel, y: &[f64]) -> Result<DMatrix<f64>> {
    model.check_point(y)?;
    let m = model.kappas.len();
    let n = m + 1;
    let yn = y[m];
    let k = &model.kappas;
    let mut jac = DMatrix::zeros(n, n);
    match model.normal {
        NormalMode::Graph => {
            for j in 0..m {
                jac[(j, j)] = 1.0 - 2.0 * k[j] * yn;
                jac[(j, m)] = -2.0 * k[j] * y[j];
                jac[(m, j)] = 2.0 * k[j] * y[j];
            }
            jac[(m, m)] = 1.0;
        }
        NormalMode::Unit => {
            let g: Vec<f64> = (0..m).map(|j| 2.0 * k[j] * y[j]).collect();
            let len = (1.0 + g.iter().map(|v| v * v).sum::<f64>()).sqrt();
            let len3 = len * len * len;
            for j in 0..m {
                for i in 0..m {
                    let mut d = -g[j] * g[i] * 2.0 * k[i] / len3;
                    if i == j {
                        d += 2.0 * k[j] / len;
                    }
                    jac[(j, i)] = if i == j { 1.0 } else { 0.0 } - yn * d;
                }
                jac[(j, m)] = -g[j] / len;
                jac[(m, j)] = g[j] - yn * g[j] * 2.0 * k[j] / len3;
            }
            jac[(m, m)] = 1.0 / len;
        }
    }
    Ok(jac)
}

/// The first-order part A(y) of DΦ(y) − Id.
pub fn a_matrix(model: &CurvatureModel, y: &[f64]) -> Result<DMatrix<f64>> {
    model.check_point(y)?;
    let m = model.kappas.len();
    let mut a = DMatrix::zeros(m + 1, m + 1);
    for (j, k) in model.kappas.iter().enumerate() {
        a[(j, j)] = -2.0 * y[m] * k;
        a[(j, m)] = -2.0 * k * y[j];
        a[(m, j)] = 2.0 * k * y[j];
    }
    Ok(a)
}

/// |det DΦ(y) − (1 − (N−1) H y_N)|.
pub fn jacobian_expansion_error(model: &CurvatureModel, y: &[f64]) -> Result<f64> {
    let jac = phi_jacobian(model, y)?;
    let det = jac.lu().determinant();
    let nm1 = f64::from(model.n - 1);
    Ok((det - (1.0 - nm1 * model.h * y[model.kappas.len()])).abs())
}

/// max-entry norm of DΦ(y) − Id − A(y).
pub fn jacobian_remainder(model: &CurvatureModel, y: &[f64]) -> Result<f64> {
    let jac = phi_jacobian(model, y)?;
    let a = a_matrix(model, y)?;
    let n = jac.nrows();
    Ok((jac - DMatrix::identity(n, n) - a).amax())
}

/// The first-order inverse Jacobian Id − A(y), i.e. the entry table
/// ∂y_j/∂x_j ≈ 1 + 2y_Nκ_j, ∂y_i/∂x_N ≈ 2κ_i y_i, ∂y_N/∂x_j ≈ −2κ_j y_j, ∂y_N/∂x_N ≈ 1.
pub fn inverse_jacobian_model(model: &CurvatureModel, y: &[f64]) -> Result<DMatrix<f64>> {
    let a = a_matrix(model, y)?;
    let n = a.nrows();
    Ok(DMatrix::identity(n, n) - a)
}

/// max-entry norm of (DΦ(y))⁻¹ − (Id − A(y)).
pub fn inverse_expansion_error(model: &CurvatureModel, y: &[f64]) -> Result<f64> {
    let jac = phi_jacobian(model, y)?;
    let inv = jac
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular("chart Jacobian is not invertible".into()))?;
    Ok((inv - inverse_jacobian_model(model, y)?).amax())
}

/// Least-squares slope of log(err) against log(t) for the scaled points t·y.
pub fn scaling_slope(
    model: &CurvatureModel,
    y: &[f64],
    ts: &[f64],
    err: impl Fn(&CurvatureModel, &[f64]) -> Result<f64>,
) -> Result<f64> {
    let mut xs = Vec::with_capacity(ts.len());
    let mut ls = Vec::with_capacity(ts.len());
    for &t in ts {
        let p: Vec<f64> = y.iter().map(|v| t * v).collect();
        let e = err(model, &p)?;
        if !(e > 0.0) {
            return Err(Error::Fit(format!("error vanished at t = {t}; slope undefined")));
        }
        xs.push(t.ln());
        ls.push(e.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let ml = ls.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxl: f64 = xs.iter().zip(&ls).map(|(x, l)| (x - mx) * (l - ml)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("scaling factors must be distinct".into()));
    }
    Ok(sxl / sxx)
}
