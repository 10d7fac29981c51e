//! Radial reduction of the full-space, half-space and half-ball integrals.
//!
//! Every integrand of the problem is of the form f(|y|)·(angular factor), so an
//! N-dimensional integral becomes an angular moment times a one-dimensional
//! integral against r^{N−1}. The one-dimensional integrals are done by the
//! adaptive Gauss–Kronrod engine in [`engine`]; [0, ∞) is mapped onto [0, 1)
//! with r = s/(1−s).

pub mod engine;
mod iterms;
mod jintegrals;
mod moments;

pub use engine::{integrate, integrate_with_breaks, QuadResult, QuadratureSpec};
pub use iterms::{half_ball_critical_norm, i_terms, ITerms, RemainderClass};
pub use jintegrals::{j_integrals, JIntegrals};
pub use moments::{angular_moment, angular_moment_by_latitude, AngularMoments};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Radial integration range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RadialInterval {
    /// [0, R]
    Ball(f64),
    /// [0, ∞)
    Whole,
}

/// ∫ f(r) r^{N−1} dr over the interval.
pub fn radial_integral<F: Fn(f64) -> f64>(
    f: F,
    n: u32,
    interval: RadialInterval,
    spec: &QuadratureSpec,
) -> Result<f64> {
    radial_integral_with_breaks(f, n, interval, &[], spec).map(|r| r.value)
}

/// ∫ f(r) r^{N−1} dr, with extra radii used as initial panel edges.
///
/// Break points outside the interval are ignored.
pub fn radial_integral_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    n: u32,
    interval: RadialInterval,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    let power = n as i32 - 1;
    weighted_integral(|r| f(r) * r.powi(power), interval, breaks, spec)
}

/// ∫ g(r) dr over the interval; the caller supplies any weight inside `g`.
pub fn weighted_integral<F: Fn(f64) -> f64>(
    g: F,
    interval: RadialInterval,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    match interval {
        RadialInterval::Ball(radius) => {
            if !(radius > 0.0) || !radius.is_finite() {
                return domain(format!("radial upper limit must be positive, got {radius}"));
            }
            let points = edges(breaks.iter().copied().filter(|&b| b > 0.0 && b < radius), 0.0, radius);
            integrate_with_breaks(g, &points, spec)
        }
        RadialInterval::Whole => {
            let points = edges(
                breaks.iter().filter(|&&b| b > 0.0 && b.is_finite()).map(|&b| b / (1.0 + b)),
                0.0,
                1.0,
            );
            integrate_with_breaks(
                |s| {
                    let inv = 1.0 / (1.0 - s);
                    let r = s * inv;
                    g(r) * inv * inv
                },
                &points,
                spec,
            )
        }
    }
}

fn edges(interior: impl Iterator<Item = f64>, lo: f64, hi: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = std::iter::once(lo).chain(interior).chain(std::iter::once(hi)).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1e-300));
    pts
}

/// Geometric break points ε·2^k in (0, upper), suited to integrands concentrated at scale ε.
pub fn scale_breaks(eps: f64, upper: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = 0.25 * eps;
    while r < upper && out.len() < 200 {
        out.push(r);
        r *= 2.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{beta, sphere_area};

    #[test]
    fn constant_on_unit_interval() {
        let spec = QuadratureSpec::default();
        let v = radial_integral(|_| 1.0, 5, RadialInterval::Ball(1.0), &spec).unwrap();
        assert!((v - 0.2).abs() < 1e-15);
    }

    #[test]
    fn beta_reduction_on_half_line() {
        // ∫₀^∞ (r²−1) r^N/(1+r²)^N dr = ½[B((N+3)/2, (N−3)/2) − B((N+1)/2, (N−1)/2)]
        let spec = QuadratureSpec::default();
        for n in [5u32, 7, 9, 11] {
            let nf = f64::from(n);
            let v = radial_integral(
                |r| (r * r - 1.0) * r / (1.0 + r * r).powi(n as i32),
                n,
                RadialInterval::Whole,
                &spec,
            )
            .unwrap();
            let want = 0.5
                * (beta(0.5 * (nf + 3.0), 0.5 * (nf - 3.0)).unwrap()
                    - beta(0.5 * (nf + 1.0), 0.5 * (nf - 1.0)).unwrap());
            assert!((v - want).abs() < 1e-12 * want.abs().max(1.0), "N={n}: {v} vs {want}");
        }
        let v = radial_integral(
            |r| (r * r - 1.0) * r / (1.0 + r * r).powi(5),
            5,
            RadialInterval::Whole,
            &spec,
        )
        .unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_moment() {
        // ∫_{ℝ⁶} e^{−|x|²} dx = π³, so ∫₀^∞ e^{−r²} r⁵ dr = π³/|S⁵| = 1
        let spec = QuadratureSpec::default();
        let v = radial_integral(|r| (-r * r).exp(), 6, RadialInterval::Whole, &spec).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!((v * sphere_area(5) - std::f64::consts::PI.powi(3)).abs() < 1e-10);
    }

    #[test]
    fn tail_breaks_are_mapped() {
        let spec = QuadratureSpec::default();
        let eps: f64 = 1e-3;
        let f = |r: f64| (eps / (eps * eps + r * r)).powi(6);
        let plain = radial_integral_with_breaks(f, 6, RadialInterval::Whole, &[], &spec).unwrap();
        let broken =
            radial_integral_with_breaks(f, 6, RadialInterval::Whole, &scale_breaks(eps, 1e3), &spec)
                .unwrap();
        assert!((plain.value - broken.value).abs() < 1e-9 * broken.value);
        // r = εs gives ∫₀^∞ s⁵/(1+s²)⁶ ds = ½B(3, 3) for every ε
        let want = 0.5 * beta(3.0, 3.0).unwrap();
        assert!((broken.value - want).abs() < 1e-9 * want);
    }

    #[test]
    fn rejects_bad_interval() {
        let spec = QuadratureSpec::default();
        assert!(radial_integral(|_| 1.0, 5, RadialInterval::Ball(0.0), &spec).is_err());
    }

    #[test]
    fn scale_breaks_are_increasing() {
        let b = scale_breaks(1e-3, 0.25);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert!(*b.last().unwrap() < 0.25);
        assert!(b[0] < 1e-3);
    }
}
