//! Globally adaptive 21-point Gauss–Kronrod integration on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Accuracy targets and subdivision cap for the adaptive engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || self.max_subdivisions < 1 {
            return Err(Error::Domain(format!(
                "quadrature tolerances must be positive and the cap at least 1: {self:?}"
            )));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Value and error estimate of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // largest error first; ties broken by position so the splitting order is fixed
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
pub fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    if !res_k.is_finite() || !res_abs.is_finite() {
        return Err(Error::Domain(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

/// ∫ f over [points[0], points.last()], with the listed interior points as initial panel edges.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    spec.validate()?;
    if points.len() < 2 {
        return Err(Error::Domain("need at least two interval endpoints".into()));
    }
    if points.windows(2).any(|w| !(w[1] > w[0])) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Domain(format!(
            "break points must be finite and strictly increasing: {points:?}"
        )));
    }
    let mut heap = BinaryHeap::with_capacity(spec.max_subdivisions + points.len());
    let mut value = 0.0;
    let mut error = 0.0;
    for w in points.windows(2) {
        let (v, e) = gauss_kronrod_21(&f, w[0], w[1])?;
        value += v;
        error += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let cap = spec.max_subdivisions.max(points.len() - 1);
    while error > spec.target(value) && heap.len() < cap {
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gauss_kronrod_21(&f, worst.a, mid)?;
        let (v2, e2) = gauss_kronrod_21(&f, mid, worst.b)?;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum in positional order so the result does not depend on the update history
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error: f64 = panels.iter().map(|p| p.error).sum();
    if error > spec.target(value) {
        return Err(Error::Accuracy {
            estimate: value,
            error,
            target: spec.target(value),
        });
    }
    Ok(QuadResult {
        value,
        error,
        panels: panels.len(),
    })
}

/// ∫ₐᵇ f.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_polynomial_exactness() {
        // Kronrod rule integrates degree ≤ 31 exactly on [−1, 1]
        for deg in 0..=31u32 {
            let (v, _) = gauss_kronrod_21(&|x: f64| x.powi(deg as i32), -1.0, 1.0).unwrap();
            let want = if deg % 2 == 1 { 0.0 } else { 2.0 / f64::from(deg + 1) };
            assert!((v - want).abs() < 1e-14, "degree {deg}: {v} vs {want}");
        }
        let (v, _) = gauss_kronrod_21(&|x: f64| x.powi(32), -1.0, 1.0).unwrap();
        assert!((v - 2.0 / 33.0).abs() > 1e-12);
    }

    #[test]
    fn gauss_subrule_exact_to_degree_nineteen() {
        for deg in (0..=19).step_by(2) {
            let g: f64 = (0..5)
                .map(|j| 2.0 * WG[j] * XGK[2 * j + 1].powi(deg))
                .sum();
            assert!((g - 2.0 / f64::from(deg + 1)).abs() < 1e-14);
        }
    }

    #[test]
    fn adaptive_smooth_and_peaked() {
        let spec = QuadratureSpec::default();
        let r = integrate(f64::sin, 0.0, std::f64::consts::PI, &spec).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        let eps: f64 = 1e-3;
        let r = integrate(|x| eps / (eps * eps + x * x), -1.0, 1.0, &spec).unwrap();
        let want = 2.0 * (1.0 / eps).atan();
        assert!((r.value - want).abs() < 1e-9);
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &spec).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn break_points_reduce_work() {
        let spec = QuadratureSpec::default();
        let eps: f64 = 1e-4;
        let f = |x: f64| eps / (eps * eps + x * x);
        let plain = integrate(f, 0.0, 1.0, &spec).unwrap();
        let broken = integrate_with_breaks(f, &[0.0, eps, 10.0 * eps, 100.0 * eps, 1.0], &spec).unwrap();
        assert!((plain.value - broken.value).abs() < 1e-9);
        assert!(broken.panels < plain.panels);
    }

    #[test]
    fn cap_exhaustion_reports_partial_estimate() {
        let spec = QuadratureSpec::new(1e-15, 1e-15, 3).unwrap();
        match integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, &spec) {
            Err(Error::Accuracy { estimate, .. }) => assert!((estimate - 4.0 / 3.0).abs() < 1e-3),
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_rejected() {
        let spec = QuadratureSpec::default();
        assert!(matches!(
            integrate(|_| f64::NAN, 0.0, 1.0, &spec),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn invalid_spec() {
        assert!(QuadratureSpec::new(0.0, 1e-10, 10).is_err());
        assert!(QuadratureSpec::new(1e-12, 1e-10, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let spec = QuadratureSpec::default();
        let f = |x: f64| (1.0 / (1e-3 + x)).sin();
        let a = integrate(f, 0.0, 1.0, &spec);
        let b = integrate(f, 0.0, 1.0, &spec);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
