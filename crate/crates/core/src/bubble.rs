//! The extremal bubbles u_ε and the compactly supported glued family z_ε.
//!
//! With k = (N−4)/2 and s = ε² + r²,
//!
//! ```text
//! u_ε(r)  = γ_N ε^k s^{−k}
//! ∂_l u_ε = −γ_N (N−4) ε^k s^{−(N−2)/2} y_l
//! Δu_ε    = −γ_N (N−4) ε^k (Nε² + 2r²) s^{−N/2}
//! ```
//!
//! and u_ε solves Δ²u = u^{(N+4)/(N−4)} on ℝᴺ.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::special::DimensionParams;

/// A member of the bubble family, fixed by its concentration scale ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BubbleParams {
    pub dims: DimensionParams,
    eps: f64,
}

impl BubbleParams {
    pub fn new(dims: DimensionParams, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return domain(format!("bubble scale must be positive and finite, got {eps}"));
        }
        Ok(Self { dims, eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn half_excess(&self) -> f64 {
        0.5 * (self.dims.nf() - 4.0)
    }

    /// γ_N ε^{(N−4)/2}, the prefactor shared by every closed form.
    fn prefactor(&self) -> f64 {
        self.dims.gamma_n() * self.eps.powf(self.half_excess())
    }

    fn s(&self, r: f64) -> f64 {
        self.eps * self.eps + r * r
    }

    pub fn value(&self, r: f64) -> f64 {
        self.prefactor() * self.s(r).powf(-self.half_excess())
    }

    /// ∂_r u_ε.
    pub fn radial_derivative(&self, r: f64) -> f64 {
        let n = self.dims.nf();
        -self.prefactor() * (n - 4.0) * r * self.s(r).powf(-0.5 * (n - 2.0))
    }

    /// ∂²_r u_ε.
    pub fn radial_second_derivative(&self, r: f64) -> f64 {
        let n = self.dims.nf();
        let s = self.s(r);
        -self.prefactor()
            * (n - 4.0)
            * (s.powf(-0.5 * (n - 2.0)) - (n - 2.0) * r * r * s.powf(-0.5 * n))
    }

    /// Cartesian gradient ∂u_ε/∂y_l at the point `y`.
    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dims.nf();
        let r2: f64 = y.iter().map(|v| v * v).sum();
        let scale = -self.prefactor() * (n - 4.0) * (self.eps * self.eps + r2).powf(-0.5 * (n - 2.0));
        y.iter().map(|v| scale * v).collect()
    }

    /// Cartesian Hessian ∂²u_ε/∂y_k∂y_l, row-major.
    pub fn hessian(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dims.nf();
        let dim = y.len();
        let r2: f64 = y.iter().map(|v| v * v).sum();
        let s = self.eps * self.eps + r2;
        let c = self.prefactor() * (n - 4.0);
        let diag = -c * s.powf(-0.5 * (n - 2.0));
        let outer = c * (n - 2.0) * s.powf(-0.5 * n);
        let mut h = vec![0.0; dim * dim];
        for k in 0..dim {
            for l in 0..dim {
                h[k * dim + l] = outer * y[k] * y[l] + if k == l { diag } else { 0.0 };
            }
        }
        h
    }

    pub fn laplacian(&self, r: f64) -> f64 {
        let n = self.dims.nf();
        let e2 = self.eps * self.eps;
        -self.prefactor() * (n - 4.0) * (n * e2 + 2.0 * r * r) * self.s(r).powf(-0.5 * n)
    }

    /// Δ²u_ε from the radial Laplacian applied to the closed-form Δu_ε.
    ///
    /// Writing Δu_ε = −γ_N(N−4)ε^k h(t) with t = r² and h(t) = (Nε² + 2t) s^{−N/2},
    /// the radial Laplacian of a function of t is 2N h′ + 4t h″, where
    ///
    /// ```text
    /// h′(t) = 2 s^{−N/2} − (N/2)(Nε² + 2t) s^{−N/2−1}
    /// h″(t) = −2N s^{−N/2−1} + (N(N+2)/4)(Nε² + 2t) s^{−N/2−2}
    /// ```
    ///
    /// so s^{N/2+2}(2N h′ + 4t h″) = 4N s² − N²(Nε²+2t)s − 8N t s + N(N+2) t (Nε²+2t).
    pub fn bilaplacian(&self, r: f64) -> f64 {
        let n = self.dims.nf();
        let e2 = self.eps * self.eps;
        let t = r * r;
        let s = e2 + t;
        let lin = n * e2 + 2.0 * t;
        let poly = 4.0 * n * s * s - n * n * lin * s - 8.0 * n * t * s + n * (n + 2.0) * t * lin;
        -self.prefactor() * (n - 4.0) * poly * s.powf(-0.5 * n - 2.0)
    }
}

/// u_ε(r).
pub fn bubble_value(p: &BubbleParams, r: f64) -> f64 {
    p.value(r)
}

/// Δu_ε(r); strictly negative.
pub fn bubble_laplacian(p: &BubbleParams, r: f64) -> f64 {
    p.laplacian(r)
}

/// Δ²u_ε(r) − u_ε(r)^{(N+4)/(N−4)}.
pub fn bubble_pde_residual(p: &BubbleParams, r: f64) -> f64 {
    p.bilaplacian(r) - p.value(r).powf(p.dims.critical_power())
}

/// Matching radius of the glued family.
pub const GLUE_RADIUS: f64 = 0.5;

/// Coefficients (a, b) of w(r) = a(r−1)³ + b(r−1)² matching ϑ_ε = u_ε − u_ε(1)
/// in value and slope at r = ½.
pub fn glued_coefficients(dims: DimensionParams, eps: f64) -> Result<(f64, f64)> {
    let bubble = BubbleParams::new(dims, eps)?;
    let theta = bubble.value(GLUE_RADIUS) - bubble.value(1.0);
    let slope = bubble.radial_derivative(GLUE_RADIUS);
    // [ (r0−1)³   (r0−1)²  ] [a]   [ϑ ]
    // [ 3(r0−1)²  2(r0−1)  ] [b] = [ϑ′]
    let d = GLUE_RADIUS - 1.0;
    let (m11, m12, m21, m22) = (d * d * d, d * d, 3.0 * d * d, 2.0 * d);
    let det = m11 * m22 - m12 * m21;
    let a = (theta * m22 - m12 * slope) / det;
    let b = (m11 * slope - m21 * theta) / det;
    Ok((a, b))
}

/// The glued function z_ε: ϑ_ε on [0, ½], the cubic blend w_ε on [½, 1], zero beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GluedBubbleParams {
    pub bubble: BubbleParams,
    pub a_eps: f64,
    pub b_eps: f64,
    shift: f64,
}

impl GluedBubbleParams {
    pub fn new(dims: DimensionParams, eps: f64) -> Result<Self> {
        let bubble = BubbleParams::new(dims, eps)?;
        let (a_eps, b_eps) = glued_coefficients(dims, eps)?;
        Ok(Self {
            bubble,
            a_eps,
            b_eps,
            shift: bubble.value(1.0),
        })
    }

    pub fn r0(&self) -> f64 {
        GLUE_RADIUS
    }

    pub fn value(&self, r: f64) -> f64 {
        if r <= GLUE_RADIUS {
            self.bubble.value(r) - self.shift
        } else if r <= 1.0 {
            let d = r - 1.0;
            d * d * (self.a_eps * d + self.b_eps)
        } else {
            0.0
        }
    }

    pub fn radial_derivative(&self, r: f64) -> f64 {
        if r <= GLUE_RADIUS {
            self.bubble.radial_derivative(r)
        } else if r <= 1.0 {
            let d = r - 1.0;
            3.0 * self.a_eps * d * d + 2.0 * self.b_eps * d
        } else {
            0.0
        }
    }

    pub fn radial_second_derivative(&self, r: f64) -> f64 {
        if r <= GLUE_RADIUS {
            self.bubble.radial_second_derivative(r)
        } else if r <= 1.0 {
            6.0 * self.a_eps * (r - 1.0) + 2.0 * self.b_eps
        } else {
            0.0
        }
    }

    /// Δz_ε; takes the inner branch at r = ½ (Δz_ε jumps there, z_ε is only C¹).
    pub fn laplacian(&self, r: f64) -> f64 {
        if r <= GLUE_RADIUS {
            self.bubble.laplacian(r)
        } else if r <= 1.0 {
            let n = self.bubble.dims.nf();
            self.radial_second_derivative(r) + (n - 1.0) / r * self.radial_derivative(r)
        } else {
            0.0
        }
    }
}

/// z_ε(r).
pub fn glued_value(g: &GluedBubbleParams, r: f64) -> f64 {
    g.value(r)
}

/// Smooth radial cut-off η: 1 on [0, r0/4], 0 on [r0/2, ∞), quintic smoothstep between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffParams {
    pub r0: f64,
}

impl CutoffParams {
    pub fn new(r0: f64) -> Result<Self> {
        if !(r0 > 0.0) || !r0.is_finite() {
            return domain(format!("cut-off radius must be positive, got {r0}"));
        }
        Ok(Self { r0 })
    }

    fn inner(&self) -> f64 {
        0.25 * self.r0
    }

    fn width(&self) -> f64 {
        0.25 * self.r0
    }

    /// (η, η′, η″) at r.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        let t = (r - self.inner()) / self.width();
        if t <= 0.0 {
            return (1.0, 0.0, 0.0);
        }
        if t >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let w = self.width();
        let step = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
        let dstep = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        let d2step = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
        (1.0 - step, -dstep / w, -d2step / (w * w))
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// Outer edge r0/2 of the support.
    pub fn support_radius(&self) -> f64 {
        0.5 * self.r0
    }
}
