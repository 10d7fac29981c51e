use serde::Serialize;

use super::engine::QuadratureSpec;
use super::moments::AngularMoments;
use super::{radial_integral, RadialInterval};
use crate::error::{domain, Error, Result};

/// The half-space integrals
///
/// ```text
/// J₁ = ∫_{ℝᴺ₊} (N + 2|y|²)/(1+|y|²)^N y_N dy
/// J₂ = ∫_{ℝᴺ₊} (N + 2|y|²)(|y|² − y_N²)/(1+|y|²)^N y_N dy     (N ≥ 6)
/// J₃ = ∫_{ℝᴺ₊} y_N/(1+|y|²)^N dy
/// ```
///
/// and β_N = J₁/(N+2) − J₃.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JIntegrals {
    pub n: u32,
    pub j1: f64,
    /// `None` in dimension five, where the integral diverges logarithmically.
    pub j2: Option<f64>,
    pub j3: f64,
    pub beta_n: f64,
    /// β_N from one quadrature of the combined integrand (2m₁/(N+2))∫(r²−1)r^N/(1+r²)^N dr.
    pub beta_direct: f64,
}

impl JIntegrals {
    pub fn j2(&self) -> Result<f64> {
        self.j2.ok_or_else(|| {
            Error::Divergent(format!(
                "J2 diverges logarithmically for N = {}; its role is taken by the ε·log(1/ε) term",
                self.n
            ))
        })
    }

    /// The factor c(N) with β_N = c(N)·Γ((N−3)/2)Γ((N+1)/2)/Γ(N); equals 2m₁/(N+2).
    pub fn beta_prefactor(n: u32) -> Result<f64> {
        let m = AngularMoments::new(n)?;
        Ok(2.0 * m.m1 / (f64::from(n) + 2.0))
    }
}

/// J₁, J₂, J₃ and β_N in dimension `n`.
pub fn j_integrals(n: u32, spec: &QuadratureSpec) -> Result<JIntegrals> {
    if n < 5 {
        return domain(format!("J-integrals need N ≥ 5, got {n}"));
    }
    let moments = AngularMoments::new(n)?;
    let nf = f64::from(n);
    let ni = n as i32;
    let decay = |r: f64| (1.0 + r * r).powi(-ni);
    let radial_j1 = radial_integral(|r| (nf + 2.0 * r * r) * r * decay(r), n, RadialInterval::Whole, spec)?;
    let radial_j3 = radial_integral(|r| r * decay(r), n, RadialInterval::Whole, spec)?;
    let j1 = moments.m1 * radial_j1;
    let j3 = moments.m1 * radial_j3;
    let j2 = if n >= 6 {
        let radial = radial_integral(
            |r| (nf + 2.0 * r * r) * r * r * r * decay(r),
            n,
            RadialInterval::Whole,
            spec,
        )?;
        Some((moments.m1 - moments.m3) * radial)
    } else {
        None
    };
    let combined = radial_integral(|r| (r * r - 1.0) * r * decay(r), n, RadialInterval::Whole, spec)?;
    Ok(JIntegrals {
        n,
        j1,
        j2,
        j3,
        beta_n: j1 / (nf + 2.0) - j3,
        beta_direct: 2.0 * moments.m1 / (nf + 2.0) * combined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::beta_closed_form;

    // high-precision reference values
    const J1: [(u32, f64); 4] = [
        (5, 2.261_784_341_916_311_350_1),
        (6, 1.033_542_556_009_994_005_8),
        (7, 0.473_707_004_837_913_919_35),
        (8, 0.210_183_306_546_582_639_87),
    ];
    const J2: [(u32, f64); 3] = [
        (6, 3.875_784_585_037_477_521_9),
        (7, 1.098_138_965_760_618_631_2),
        (8, 0.388_959_912_114_940_287_58),
    ];
    const J3: [(u32, f64); 4] = [
        (5, 0.205_616_758_356_028_304_56),
        (6, 0.096_894_614_625_936_938_048),
        (7, 0.043_064_273_167_083_083_577),
        (8, 0.018_119_250_564_360_572_403),
    ];
    const BETA: [(u32, f64); 8] = [
        (5, 0.117_495_290_489_159_031_18),
        (6, 0.032_298_204_875_312_312_683),
        (7, 0.009_569_838_481_574_018_572_7),
        (8, 0.002_899_080_090_297_691_584_4),
        (9, 0.000_878_509_118_272_027_752_85),
        (10, 0.000_263_533_816_951_610_598_94),
        (11, 0.000_077_843_835_161_091_130_765),
        (12, 0.000_022_579_524_635_663_377_568),
    ];

    #[test]
    fn reference_values() {
        let spec = QuadratureSpec::default();
        for (n, want) in J1 {
            let j = j_integrals(n, &spec).unwrap();
            assert!((j.j1 - want).abs() < 1e-10 * want, "J1 N={n}");
        }
        for (n, want) in J2 {
            let j = j_integrals(n, &spec).unwrap();
            assert!((j.j2.unwrap() - want).abs() < 1e-10 * want, "J2 N={n}");
        }
        for (n, want) in J3 {
            let j = j_integrals(n, &spec).unwrap();
            assert!((j.j3 - want).abs() < 1e-10 * want, "J3 N={n}");
        }
        for (n, want) in BETA {
            let j = j_integrals(n, &spec).unwrap();
            assert!((j.beta_n - want).abs() < 1e-10, "beta N={n}");
        }
    }

    #[test]
    fn beta_combination_and_sign() {
        let spec = QuadratureSpec::default();
        for n in 5..=12 {
            let j = j_integrals(n, &spec).unwrap();
            assert!((j.beta_n - j.beta_direct).abs() < 1e-10, "N={n}");
            assert!(j.beta_n > 0.0);
            assert!(j.j1 > 0.0 && j.j3 > 0.0);
            if n >= 6 {
                assert!(j.j2.unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn beta_proportional_to_gamma_form() {
        let spec = QuadratureSpec::default();
        for n in 5..=12 {
            let j = j_integrals(n, &spec).unwrap();
            let c = JIntegrals::beta_prefactor(n).unwrap();
            let want = c * beta_closed_form(n).unwrap();
            assert!((j.beta_n - want).abs() < 1e-10 * want.max(1e-3), "N={n}");
        }
        assert!((JIntegrals::beta_prefactor(5).unwrap() - 1.409_943_485_869_908_374_1).abs() < 1e-14);
        assert!((JIntegrals::beta_prefactor(6).unwrap() - 1.315_947_253_478_581_149_2).abs() < 1e-14);
    }

    #[test]
    fn dimension_five_flags_divergence() {
        let j = j_integrals(5, &QuadratureSpec::default()).unwrap();
        assert!(j.j2.is_none());
        assert!(matches!(j.j2(), Err(Error::Divergent(_))));
    }
}
