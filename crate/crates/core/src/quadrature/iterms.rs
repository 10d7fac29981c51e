use std::f64::consts::PI;

use serde::Serialize;

use super::engine::QuadratureSpec;
use super::jintegrals::j_integrals;
use super::moments::AngularMoments;
use super::{radial_integral_with_breaks, scale_breaks, RadialInterval};
use crate::bubble::BubbleParams;
use crate::chart::CurvatureModel;
use crate::error::{domain, Result};
use crate::special::DimensionParams;

/// Order of the part of ∫|Δψ_ε|² that is not resolved by I₁..I₄.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RemainderClass {
    /// O(ε), N = 5
    Eps,
    /// O(ε² log(1/ε)), N = 6
    EpsSquaredLog,
    /// O(ε²), N ≥ 7
    EpsSquared,
}

impl RemainderClass {
    pub fn for_dimension(n: u32) -> Self {
        match n {
            5 => Self::Eps,
            6 => Self::EpsSquaredLog,
            _ => Self::EpsSquared,
        }
    }

    /// The gauge function at ε.
    pub fn gauge(&self, eps: f64) -> f64 {
        match self {
            Self::Eps => eps,
            Self::EpsSquaredLog => eps * eps * (1.0 / eps).ln(),
            Self::EpsSquared => eps * eps,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Eps => "O(eps)",
            Self::EpsSquaredLog => "O(eps^2 log(1/eps))",
            Self::EpsSquared => "O(eps^2)",
        }
    }
}

/// The decomposition ∫|Δψ_ε|² ≈ I₁ + I₂ + I₃ + I₄ over the half-ball of radius r0/2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ITerms {
    pub n: u32,
    pub eps: f64,
    pub r0: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub i5_class: RemainderClass,
    /// Two-term prediction S^{N/4}/2 − (curvature coefficient)·ε (or ε log(1/ε) for N = 5).
    pub predicted: f64,
    /// (I₁ + I₂ + I₃ + I₄) − predicted.
    pub i5_empirical: f64,
    pub warning: Option<String>,
}

impl ITerms {
    pub fn sum(&self) -> f64 {
        self.i1 + self.i2 + self.i3 + self.i4
    }
}

/// Coefficient c with ∫|Δψ_ε|² = S^{N/4}/2 − c·ε + o(ε) for N ≥ 6, or − c·ε log(1/ε) for N = 5.
pub fn laplacian_curvature_coefficient(dims: DimensionParams, h: f64, spec: &QuadratureSpec) -> Result<f64> {
    let n = dims.n();
    let nf = dims.nf();
    if n == 5 {
        return Ok(8.0 * PI * PI * 105f64.powf(0.25) * h);
    }
    let j = j_integrals(n, spec)?;
    Ok(dims.d_n() * h * (nf - 2.0) * (j.j1 + 4.0 * j.j2()? / (nf - 1.0)))
}

/// Each I-term by quadrature of its integrand, after the substitution r = εs.
pub fn i_terms(
    dims: DimensionParams,
    eps: f64,
    r0: f64,
    model: &CurvatureModel,
    spec: &QuadratureSpec,
) -> Result<ITerms> {
    check_args(dims, eps, r0, model)?;
    let n = dims.n();
    let nf = dims.nf();
    let ni = n as i32;
    let h = model.h();
    let moments = AngularMoments::new(n)?;
    let upper = 0.5 * r0 / eps;
    let interval = RadialInterval::Ball(upper);
    let breaks = scale_breaks(1.0, upper);
    let unit = BubbleParams::new(dims, 1.0)?;
    let dn = dims.d_n();

    let lap2 = radial_integral_with_breaks(|s| unit.laplacian(s).powi(2), n, interval, &breaks, spec)?.value;
    let i1 = 0.5 * moments.omega * lap2;

    // the remaining integrands carry one extra power of s from y_N = s·cosθ
    let k2 = radial_integral_with_breaks(
        |s| (nf + 2.0 * s * s).powi(2) * s / (1.0 + s * s).powi(ni),
        n,
        interval,
        &breaks,
        spec,
    )?
    .value;
    let i2 = -dn * h * eps * moments.m1 * k2;

    let k3 = radial_integral_with_breaks(
        |s| (nf + 2.0 * s * s) * s / (1.0 + s * s).powi(ni - 1),
        n,
        interval,
        &breaks,
        spec,
    )?
    .value;
    let i3 = 2.0 * dn * h * eps * moments.m1 * k3;

    let k4 = radial_integral_with_breaks(
        |s| (nf + 2.0 * s * s) * s * s * s / (1.0 + s * s).powi(ni),
        n,
        interval,
        &breaks,
        spec,
    )?
    .value;
    let i4 = -4.0 * dn * (nf - 2.0) / (nf - 1.0) * h * eps * (moments.m1 - moments.m3) * k4;

    let coeff = laplacian_curvature_coefficient(dims, h, spec)?;
    let gauge = if n == 5 { eps * (1.0 / eps).ln() } else { eps };
    let predicted = 0.5 * dims.sobolev_energy() - coeff * gauge;
    let sum = i1 + i2 + i3 + i4;

    let mut warnings = Vec::new();
    if eps > 0.1 * r0 {
        warnings.push(format!(
            "eps = {eps:e} exceeds r0/10 = {:e}; the expansion is outside its asymptotic regime",
            0.1 * r0
        ));
    }
    if let Some(w) = model.warning() {
        warnings.push(w.to_string());
    }
    Ok(ITerms {
        n,
        eps,
        r0,
        i1,
        i2,
        i3,
        i4,
        i5_class: RemainderClass::for_dimension(n),
        predicted,
        i5_empirical: sum - predicted,
        warning: (!warnings.is_empty()).then(|| warnings.join("; ")),
    })
}

/// The half-ball critical norm with the first-order volume correction,
/// ∫_{B⁺_{r0/2}} u_ε^{2*}(1 − (N−1)H y_N) dy, split as (flat part, curvature part).
pub fn half_ball_critical_norm(
    dims: DimensionParams,
    eps: f64,
    r0: f64,
    model: &CurvatureModel,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    check_args(dims, eps, r0, model)?;
    let n = dims.n();
    let moments = AngularMoments::new(n)?;
    let upper = 0.5 * r0 / eps;
    let interval = RadialInterval::Ball(upper);
    let breaks = scale_breaks(1.0, upper);
    let unit = BubbleParams::new(dims, 1.0)?;
    let q = dims.two_star();
    let flat = radial_integral_with_breaks(|s| unit.value(s).powf(q), n, interval, &breaks, spec)?.value;
    let tilt = radial_integral_with_breaks(|s| unit.value(s).powf(q) * s, n, interval, &breaks, spec)?.value;
    Ok((
        0.5 * moments.omega * flat,
        -(dims.nf() - 1.0) * model.h() * moments.m1 * eps * tilt,
    ))
}

fn check_args(dims: DimensionParams, eps: f64, r0: f64, model: &CurvatureModel) -> Result<()> {
    if !(eps > 0.0) || !(r0 > 0.0) {
        return domain(format!("eps and r0 must be positive, got eps = {eps}, r0 = {r0}"));
    }
    if model.n() != dims.n() {
        return domain(format!(
            "curvature model is for N = {} but the dimension is {}",
            model.n(),
            dims.n()
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::radial_integral;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn dims(n: u32) -> DimensionParams {
        DimensionParams::new(n).unwrap()
    }

    #[test]
    fn dimension_five_log_coefficient() {
        // 6 d₅ (m₁ − m₃) H = 8π²·105^{1/4}·H
        let d = dims(5);
        let m = AngularMoments::new(5).unwrap();
        let lhs = 6.0 * d.d_n() * (m.m1 - m.m3);
        assert!((lhs - 8.0 * PI * PI * 105f64.powf(0.25)).abs() < 1e-11 * lhs);
    }

    #[test]
    fn first_term_tends_to_half_energy() {
        let spec = QuadratureSpec::default();
        for n in [6, 8] {
            let d = dims(n);
            let model = CurvatureModel::uniform(n, 1.0).unwrap();
            let t = i_terms(d, 1e-3, 1.0, &model, &spec).unwrap();
            let half = 0.5 * d.sobolev_energy();
            assert!((t.i1 - half).abs() < 1e-4 * half, "N={n}");
            assert!(t.i1 < half);
            assert!(t.warning.is_none());
        }
    }

    #[test]
    fn regime_warning() {
        let model = CurvatureModel::uniform(6, 1.0).unwrap();
        let t = i_terms(dims(6), 0.2, 1.0, &model, &QuadratureSpec::default()).unwrap();
        assert!(t.warning.unwrap().contains("asymptotic regime"));
    }

    #[test]
    fn curvature_terms_scale_with_h() {
        let spec = QuadratureSpec::default();
        let a = i_terms(dims(7), 1e-3, 1.0, &CurvatureModel::uniform(7, 1.0).unwrap(), &spec).unwrap();
        let b = i_terms(dims(7), 1e-3, 1.0, &CurvatureModel::uniform(7, 0.5).unwrap(), &spec).unwrap();
        assert!((a.i1 - b.i1).abs() < 1e-12 * a.i1);
        for (x, y) in [(a.i2, b.i2), (a.i3, b.i3), (a.i4, b.i4)] {
            assert!((x - 2.0 * y).abs() < 1e-10 * x.abs());
        }
        assert!(a.i2 < 0.0 && a.i3 > 0.0 && a.i4 < 0.0);
    }

    #[test]
    fn critical_norm_split() {
        let spec = QuadratureSpec::default();
        let d = dims(6);
        let model = CurvatureModel::uniform(6, 1.0).unwrap();
        let (flat, tilt) = half_ball_critical_norm(d, 1e-3, 1.0, &model, &spec).unwrap();
        let half = 0.5 * d.sobolev_energy();
        assert!((flat - half).abs() < 1e-6 * half);
        let j3 = j_integrals(6, &spec).unwrap().j3;
        let want = -d.gamma_n().powf(d.two_star()) * 5.0 * model.h() * j3 * 1e-3;
        assert!((tilt - want).abs() < 1e-3 * want.abs());
    }

    #[test]
    fn symmetry_reduction_by_monte_carlo() {
        // ∫_{B⁺} g(|y|) y₁² y_N dy against (1/(N−1))(m₁ − m₃)∫₀¹ g(r) r^{N+2} dr
        let n = 6usize;
        let g = |r: f64| 1.0 / (1.0 + r * r).powi(2);
        let moments = AngularMoments::new(n as u32).unwrap();
        let radial =
            radial_integral(|r| g(r) * r * r * r, n as u32, RadialInterval::Ball(1.0), &QuadratureSpec::default())
                .unwrap();
        let reduced = (moments.m1 - moments.m3) / (n as f64 - 1.0) * radial;

        let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
        let samples = 1usize << 24;
        let mut acc = 0.0;
        let mut y = vec![0.0; n];
        for k in 0..samples {
            // uniform direction from Gaussians, radius stratified over [0, 1]
            let mut norm2: f64 = 0.0;
            for v in y.iter_mut() {
                *v = rng.sample(StandardNormal);
                norm2 += *v * *v;
            }
            let u = (k as f64 + rng.random::<f64>()) / samples as f64;
            let r = u.powf(1.0 / n as f64);
            let scale = r / norm2.sqrt();
            let y1 = y[0] * scale;
            let yn = (y[n - 1] * scale).abs();
            acc += g(r) * y1 * y1 * yn;
        }
        // uniform sampling of B⁺ has density 1/|B⁺| = 2/|B|
        let volume = crate::special::unit_ball_volume(n as u32);
        let direct = 0.5 * volume * acc / samples as f64;
        assert!((direct - reduced).abs() < 1e-3 * reduced, "{direct} vs {reduced}");
    }
}
