//! Gamma-function machinery and the closed-form constants of the problem.
//!
//! Everything here is evaluated in binary64; Γ is handled in log space so that
//! Γ(N) for N up to a few hundred never overflows.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};

/// Shift of the Lanczos approximation (g = 607/128, 15 terms, Godfrey).
const LANCZOS_SHIFT: f64 = 5.242_187_5;
const LANCZOS_LEAD: f64 = 0.999_999_999_999_997_1;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma requires a finite positive argument, got {x}"));
    }
    Ok(log_gamma_positive(x))
}

fn log_gamma_positive(x: f64) -> f64 {
    let shifted = x + LANCZOS_SHIFT;
    let head = (x + 0.5) * shifted.ln() - shifted;
    let mut denom = x;
    let mut series = LANCZOS_LEAD;
    for c in LANCZOS_COEFFS {
        denom += 1.0;
        series += c / denom;
    }
    head + (SQRT_TWO_PI * series / x).ln()
}

/// Γ(x) for x > 0 (overflows to +∞ past x ≈ 171.6).
pub fn gamma(x: f64) -> Result<f64> {
    log_gamma(x).map(f64::exp)
}

/// Euler Beta function B(a, b) = Γ(a)Γ(b)/Γ(a+b).
pub fn beta(a: f64, b: f64) -> Result<f64> {
    Ok((log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?).exp())
}

/// Surface area of the unit sphere Sⁿ ⊂ ℝⁿ⁺¹.
pub fn sphere_area(n: u32) -> f64 {
    let half = 0.5 * f64::from(n + 1);
    2.0 * PI.powf(half) / log_gamma_positive(half).exp()
}

/// Volume of the unit ball in ℝᵈ.
pub fn unit_ball_volume(d: u32) -> f64 {
    let half = 0.5 * f64::from(d);
    PI.powf(half) / log_gamma_positive(half + 1.0).exp()
}

/// Volume of the ball of radius `radius` in ℝᵈ.
pub fn ball_volume(d: u32, radius: f64) -> f64 {
    unit_ball_volume(d) * radius.powi(d as i32)
}

fn check_dim(n: u32) -> Result<()> {
    if n < 5 {
        return domain(format!("dimension N = {n} not supported: N ≥ 5 required"));
    }
    Ok(())
}

/// (N−4)(N−2)N(N+2), the polynomial that appears in γ_N and S.
fn paneitz_product(n: u32) -> f64 {
    let n = f64::from(n);
    (n - 4.0) * (n - 2.0) * n * (n + 2.0)
}

/// Sharp constant S of the embedding D^{2,2}(ℝᴺ) ⊂ L^{2N/(N−4)}(ℝᴺ):
/// S = π²(N−4)(N−2)N(N+2)(Γ(N/2)/Γ(N))^{4/N}.
pub fn sobolev_constant(n: u32) -> Result<f64> {
    check_dim(n)?;
    let nf = f64::from(n);
    let log_ratio = log_gamma_positive(0.5 * nf) - log_gamma_positive(nf);
    Ok(PI * PI * paneitz_product(n) * (4.0 / nf * log_ratio).exp())
}

/// Bubble normaliser γ_N = [(N−4)(N−2)N(N+2)]^{(N−4)/8}.
pub fn bubble_normalizer(n: u32) -> Result<f64> {
    check_dim(n)?;
    let nf = f64::from(n);
    Ok(paneitz_product(n).powf((nf - 4.0) / 8.0))
}

/// ᾱ(N, |Ω|) = S / (2|Ω|)^{4/N}: above it the constant solution cannot be a least-energy solution.
pub fn alpha_bar(n: u32, volume: f64) -> Result<f64> {
    check_dim(n)?;
    if !(volume > 0.0) || !volume.is_finite() {
        return domain(format!("alpha_bar requires a positive finite volume, got {volume}"));
    }
    let s = sobolev_constant(n)?;
    Ok(s / (2.0 * volume).powf(4.0 / f64::from(n)))
}

/// Γ((N−3)/2)Γ((N+1)/2)/Γ(N), the Gamma factor that makes β_N positive.
pub fn beta_closed_form(n: u32) -> Result<f64> {
    if n <= 3 {
        return domain(format!("beta_closed_form needs (N−3)/2 > 0, got N = {n}"));
    }
    let nf = f64::from(n);
    Ok((log_gamma_positive(0.5 * (nf - 3.0)) + log_gamma_positive(0.5 * (nf + 1.0))
        - log_gamma_positive(nf))
    .exp())
}

/// Dimension N together with every constant derived from it.
///
/// Built once per N and shared by the other modules; all fields are immutable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionParams {
    n: u32,
    two_star: f64,
    gamma_n: f64,
    sobolev: f64,
    d_n: f64,
}

impl DimensionParams {
    pub fn new(n: u32) -> Result<Self> {
        check_dim(n)?;
        let nf = f64::from(n);
        let gamma_n = bubble_normalizer(n)?;
        Ok(Self {
            n,
            two_star: 2.0 * nf / (nf - 4.0),
            gamma_n,
            sobolev: sobolev_constant(n)?,
            d_n: gamma_n * gamma_n * (nf - 4.0).powi(2) * (nf - 1.0),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    /// Critical exponent 2* = 2N/(N−4).
    pub fn two_star(&self) -> f64 {
        self.two_star
    }

    /// Critical power (N+4)/(N−4) = 2* − 1 of the nonlinearity.
    pub fn critical_power(&self) -> f64 {
        self.two_star - 1.0
    }

    /// γ_N.
    pub fn gamma_n(&self) -> f64 {
        self.gamma_n
    }

    /// S.
    pub fn sobolev(&self) -> f64 {
        self.sobolev
    }

    /// d_N = γ_N²(N−4)²(N−1).
    pub fn d_n(&self) -> f64 {
        self.d_n
    }

    /// S^{N/4}, the common value of ∫|Δu_ε|² and ∫|u_ε|^{2*} over ℝᴺ.
    pub fn sobolev_energy(&self) -> f64 {
        self.sobolev.powf(0.25 * self.nf())
    }

    /// S / 2^{4/N}, the half-space constant.
    pub fn half_space_constant(&self) -> f64 {
        self.sobolev / 2f64.powf(4.0 / self.nf())
    }

    /// |S^{N−1}|.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.n - 1)
    }

    /// ᾱ(N, |Ω|).
    pub fn alpha_bar(&self, volume: f64) -> Result<f64> {
        alpha_bar(self.n, volume)
    }

    /// Amplitude α^{(N−4)/8} of the nonzero constant solution.
    pub fn constant_solution(&self, alpha: f64) -> f64 {
        alpha.powf((self.nf() - 4.0) / 8.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from a 40-digit evaluation of ln Γ.
    const LGAMMA_TABLE: [(f64, f64); 9] = [
        (0.5, 0.572_364_942_924_700_087_07),
        (1.5, -0.120_782_237_635_245_222_35),
        (2.5, 0.284_682_870_472_919_159_63),
        (3.7, 1.428_072_326_665_387_921_9),
        (10.0, 12.801_827_480_081_469_611),
        (33.3, 82.603_723_581_654_952_928),
        (100.0, 359.134_205_369_575_398_78),
        (199.5, 855.286_389_273_452_573_79),
        (0.73, 0.225_513_749_692_687_411_25),
    ];

    #[test]
    fn log_gamma_matches_reference_table() {
        for (x, want) in LGAMMA_TABLE {
            let got = log_gamma(x).unwrap();
            assert!(((got - want) / want).abs() <= 1e-13, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn log_gamma_exact_points() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-15);
        let half = log_gamma(0.5).unwrap();
        assert!((half - PI.sqrt().ln()).abs() < 1e-15);
        assert!((log_gamma(5.0).unwrap() - 24f64.ln()).abs() < 1e-14);
        // ln n! against a direct sum
        let mut acc = 0.0;
        for k in 1..=150u32 {
            acc += f64::from(k).ln();
            let got = log_gamma(f64::from(k) + 1.0).unwrap();
            assert!((got - acc).abs() <= 1e-13 * acc.max(1.0), "k={k}");
        }
    }

    #[test]
    fn log_gamma_rejects_non_positive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn sobolev_constant_reference_values() {
        let table = [
            (5, 102.383_273_440_582_934_88),
            (6, 247.284_447_366_160_205_38),
            (8, 653.824_711_826_446_959_26),
            (12, 1914.436_019_426_103_505_3),
            (20, 6195.531_821_823_305_561_4),
        ];
        for (n, want) in table {
            let got = sobolev_constant(n).unwrap();
            assert!(((got - want) / want).abs() < 1e-13, "N={n}");
        }
        // the N=5 closed form written out by hand
        let direct = PI * PI * 105.0 * (gamma(2.5).unwrap() / 24.0).powf(0.8);
        assert!((sobolev_constant(5).unwrap() - direct).abs() < 1e-12 * direct);
        assert!(sobolev_constant(4).is_err());
    }

    #[test]
    fn bubble_normalizer_values() {
        let g5 = bubble_normalizer(5).unwrap();
        assert!((g5 - 105f64.powf(0.125)).abs() < 1e-15);
        assert!((g5 * g5 - 105f64.powf(0.25)).abs() < 1e-14);
        let g6 = bubble_normalizer(6).unwrap();
        assert!((g6 - 384f64.powf(0.25)).abs() < 1e-14);
        for n in 5..=20 {
            let g = bubble_normalizer(n).unwrap();
            let lhs = g.powf(8.0 / (f64::from(n) - 4.0));
            let rhs = paneitz_product(n);
            assert!(((lhs - rhs) / rhs).abs() < 1e-13, "N={n}");
        }
        assert!(bubble_normalizer(3).is_err());
    }

    #[test]
    fn dimension_params_invariants() {
        for n in 5..=20u32 {
            let p = DimensionParams::new(n).unwrap();
            assert!(p.two_star() > 2.0 && p.gamma_n() > 0.0 && p.sobolev() > 0.0 && p.d_n() > 0.0);
            assert!((p.two_star() * (p.nf() - 4.0) - 2.0 * p.nf()).abs() < 1e-12);
            let d = p.gamma_n().powi(2) * (p.nf() - 4.0).powi(2) * (p.nf() - 1.0);
            assert!(((p.d_n() - d) / d).abs() <= 1e-14);
        }
        assert!(DimensionParams::new(4).is_err());
    }

    #[test]
    fn alpha_bar_formula() {
        let ab = alpha_bar(6, PI.powi(3) / 6.0).unwrap();
        assert!((ab - 52.116_818_238_622_206_173).abs() < 1e-11);
        for n in [5, 7, 11] {
            let s = sobolev_constant(n).unwrap();
            assert!((alpha_bar(n, 0.5).unwrap() - s).abs() < 1e-12 * s);
        }
        assert!(alpha_bar(6, 1e30).unwrap() < 1e-15);
        assert!(alpha_bar(6, 1.0).unwrap() > alpha_bar(6, 2.0).unwrap());
        assert!(alpha_bar(6, 0.0).is_err());
        assert!(alpha_bar(6, -1.0).is_err());
    }

    #[test]
    fn beta_closed_form_values() {
        assert!((beta_closed_form(5).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!((beta_closed_form(7).unwrap() - 1.0 / 120.0).abs() < 1e-16);
        for n in 5..=20 {
            assert!(beta_closed_form(n).unwrap() > 0.0);
        }
        assert!(beta_closed_form(3).is_err());
    }

    #[test]
    fn sphere_and_ball_measures() {
        assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(6) - PI.powi(3) / 6.0).abs() < 1e-13);
        for d in 2..15u32 {
            assert!((unit_ball_volume(d) - sphere_area(d - 1) / f64::from(d)).abs() < 1e-13);
        }
    }
}
