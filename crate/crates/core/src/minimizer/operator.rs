//! Conforming Galerkin discretisation of the radial Neumann problem.
//!
//! Fields are C¹ piecewise cubic Hermite functions on the uniform grid, carrying a
//! value and a slope at every node. The slopes at r = 0 and r = R are fixed to zero,
//! which gives u′(0) = 0 (smoothness at the axis) and u′(R) = 0; the condition
//! (Δu)′(R) = 0 is then the natural boundary condition of the weak form
//!
//! ```text
//! ∫ Δu Δv r^{N−1} + c ∫ u′v′ r^{N−1} + α ∫ u v r^{N−1} = ∫ |u|^{p−1}u v r^{N−1},
//! Δu = u″ + (N−1)u′/r.
//! ```
//!
//! Every discrete field lies in H²(B_R), so discrete quotients are true quotients and
//! the sharp Sobolev inequality cannot be undercut at grid scale. Element integrals use
//! 12-point Gauss–Legendre, exact for the bilinear forms up to N = 12.
//!
//! Degrees of freedom are ordered u_0, u_1, u′_1, u_2, u′_2, …, u_{n−1}.

use super::banded::{BandedCholesky, SymBanded};
use super::BallProblem;
use crate::error::{Error, Result};
use crate::rayleigh::{QuotientBreakdown, RadialGrid};

const GAUSS_POINTS: usize = 12;

/// Gauss–Legendre nodes and weights on [0, 1].
fn gauss_legendre(k: usize) -> Vec<(f64, f64)> {
    let kf = k as f64;
    (0..k)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (kf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=k {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = kf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            (0.5 * (1.0 - x), 0.5 * w)
        })
        .collect()
}

/// Basis data of one element at one quadrature point.
#[derive(Debug, Clone, Copy)]
struct QuadPoint {
    element: usize,
    /// Quadrature weight times r^{N−1}.
    weight: f64,
    value: [f64; 4],
    slope: [f64; 4],
    lap: [f64; 4],
}

/// Banded Galerkin matrices of the discrete radial problem. All integrals omit |S^{N−1}|.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    problem: BallProblem,
    /// ∫ u v r^{N−1}.
    pub mass: SymBanded,
    /// ∫ u′v′ r^{N−1}, the weak −Δ.
    pub grad: SymBanded,
    /// ∫ Δu Δv r^{N−1}, the weak Δ².
    pub bilap: SymBanded,
    /// bilap + c·grad + α·mass.
    pub full: SymBanded,
    full_factor: BandedCholesky,
    mass_factor: BandedCholesky,
    points: Vec<QuadPoint>,
}

fn value_dof(node: usize) -> usize {
    if node == 0 {
        0
    } else {
        2 * node - 1
    }
}

fn slope_dof(node: usize, nodes: usize) -> Option<usize> {
    if node == 0 || node == nodes - 1 {
        None
    } else {
        Some(2 * node)
    }
}

/// Builds the Galerkin matrices for `problem`.
pub fn assemble_operator(problem: &BallProblem) -> Result<DiscreteOperator> {
    let grid = problem.grid();
    let n = grid.len();
    if n < RadialGrid::MIN_NODES {
        return Err(Error::Grid(format!("need at least {} nodes, got {n}", RadialGrid::MIN_NODES)));
    }
    let nd = problem.dims().nf();
    let h = grid.spacing();
    let nodes = grid.nodes();
    let rule = gauss_legendre(GAUSS_POINTS);

    let mut points = Vec::with_capacity((n - 1) * GAUSS_POINTS);
    for e in 0..n - 1 {
        for &(t, w) in &rule {
            let r = nodes[e] + t * h;
            let (t2, t3) = (t * t, t * t * t);
            let h0 = 1.0 - 3.0 * t2 + 2.0 * t3;
            let value = [h0, h * (t - 2.0 * t2 + t3), 1.0 - h0, h * (t3 - t2)];
            let d0 = 6.0 * (t2 - t) / h;
            let slope = [d0, 1.0 - 4.0 * t + 3.0 * t2, -d0, 3.0 * t2 - 2.0 * t];
            let s0 = (12.0 * t - 6.0) / (h * h);
            let second = [s0, (6.0 * t - 4.0) / h, -s0, (6.0 * t - 2.0) / h];
            let mut lap = [0.0; 4];
            for a in 0..4 {
                lap[a] = second[a] + (nd - 1.0) * slope[a] / r;
            }
            // the two value functions sum to one, so their images must cancel exactly
            lap[2] = -lap[0];
            points.push(QuadPoint {
                element: e,
                weight: w * h * r.powf(nd - 1.0),
                value,
                slope,
                lap,
            });
        }
    }

    let ndof = 2 * n - 2;
    let mut mass = SymBanded::zeros(ndof, 3);
    let mut grad = SymBanded::zeros(ndof, 3);
    let mut bilap = SymBanded::zeros(ndof, 3);
    for qp in &points {
        let dofs = element_dofs(qp.element, n);
        for a in 0..4 {
            let Some(ga) = dofs[a] else { continue };
            for b in a..4 {
                let Some(gb) = dofs[b] else { continue };
                mass.add(ga, gb, qp.weight * qp.value[a] * qp.value[b]);
                grad.add(ga, gb, qp.weight * qp.slope[a] * qp.slope[b]);
                bilap.add(ga, gb, qp.weight * qp.lap[a] * qp.lap[b]);
            }
        }
    }
    let full = SymBanded::combine(&[(1.0, &bilap), (problem.grad_coeff(), &grad), (problem.alpha(), &mass)]);
    let full_factor = BandedCholesky::factor(&full)?;
    let mass_factor = BandedCholesky::factor(&mass)?;
    Ok(DiscreteOperator {
        problem: problem.clone(),
        mass,
        grad,
        bilap,
        full,
        full_factor,
        mass_factor,
        points,
    })
}

fn element_dofs(e: usize, nodes: usize) -> [Option<usize>; 4] {
    [
        Some(value_dof(e)),
        slope_dof(e, nodes),
        Some(value_dof(e + 1)),
        slope_dof(e + 1, nodes),
    ]
}

impl DiscreteOperator {
    pub fn problem(&self) -> &BallProblem {
        &self.problem
    }

    pub fn nodes(&self) -> usize {
        self.problem.grid().len()
    }

    pub fn ndof(&self) -> usize {
        2 * self.nodes() - 2
    }

    fn local(&self, u: &[f64], e: usize) -> [f64; 4] {
        let dofs = element_dofs(e, self.nodes());
        dofs.map(|d| d.map_or(0.0, |g| u[g]))
    }

    /// Degrees of freedom from nodal values and slopes (end slopes are ignored).
    pub fn dofs_from_parts(&self, values: &[f64], slopes: &[f64]) -> Vec<f64> {
        let n = self.nodes();
        let mut out = vec![0.0; self.ndof()];
        for i in 0..n {
            out[value_dof(i)] = values[i];
            if let Some(s) = slope_dof(i, n) {
                out[s] = slopes[i];
            }
        }
        out
    }

    /// Hermite interpolant of a function with known derivative.
    pub fn dofs_from_function(&self, u: impl Fn(f64) -> f64, du: impl Fn(f64) -> f64) -> Vec<f64> {
        let nodes = self.problem.grid().nodes();
        let values: Vec<f64> = nodes.iter().map(|&r| u(r)).collect();
        let slopes: Vec<f64> = nodes.iter().map(|&r| du(r)).collect();
        self.dofs_from_parts(&values, &slopes)
    }

    /// Degrees of freedom from nodal values alone, with centred-difference slopes.
    pub fn dofs_from_nodal(&self, values: &[f64]) -> Vec<f64> {
        let n = self.nodes();
        let h = self.problem.grid().spacing();
        let mut slopes = vec![0.0; n];
        for i in 1..n - 1 {
            slopes[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
        }
        self.dofs_from_parts(values, &slopes)
    }

    pub fn constant_dofs(&self, c: f64) -> Vec<f64> {
        let n = self.nodes();
        self.dofs_from_parts(&vec![c; n], &vec![0.0; n])
    }

    pub fn nodal_values(&self, u: &[f64]) -> Vec<f64> {
        let n = self.nodes();
        (0..n).map(|i| u[value_dof(i)]).collect()
    }

    pub fn nodal_slopes(&self, u: &[f64]) -> Vec<f64> {
        let n = self.nodes();
        (0..n).map(|i| slope_dof(i, n).map_or(0.0, |s| u[s])).collect()
    }

    /// Runs `f(point, u, u′, Δu)` at every quadrature point.
    fn for_each_point(&self, u: &[f64], mut f: impl FnMut(&QuadPoint, f64, f64, f64)) {
        let mut cached = usize::MAX;
        let mut loc = [0.0; 4];
        for qp in &self.points {
            if qp.element != cached {
                loc = self.local(u, qp.element);
                cached = qp.element;
            }
            let mut val = 0.0;
            let mut der = 0.0;
            let mut lap = 0.0;
            for a in 0..4 {
                val += qp.value[a] * loc[a];
                der += qp.slope[a] * loc[a];
                lap += qp.lap[a] * loc[a];
            }
            f(qp, val, der, lap);
        }
    }

    /// Σ_points weight·(g₀φ_a + g₁φ′_a + g₂Δφ_a) assembled into a load vector.
    fn assemble_load(&self, u: &[f64], g: impl Fn(f64, f64, f64) -> [f64; 3]) -> Vec<f64> {
        let n = self.nodes();
        let mut out = vec![0.0; self.ndof()];
        self.for_each_point(u, |qp, val, der, lap| {
            let [g0, g1, g2] = g(val, der, lap);
            for (a, dof) in element_dofs(qp.element, n).iter().enumerate() {
                if let Some(d) = dof {
                    out[*d] += qp.weight * (g0 * qp.value[a] + g1 * qp.slope[a] + g2 * qp.lap[a]);
                }
            }
        });
        out
    }

    /// Weak −Δ applied to u: ∫ u′φ′_a r^{N−1}.
    pub fn grad_stiffness(&self, u: &[f64]) -> Vec<f64> {
        self.assemble_load(u, |_, d, _| [0.0, d, 0.0])
    }

    /// Weak Δ² applied to u: ∫ Δu Δφ_a r^{N−1}.
    pub fn bilap_stiffness(&self, u: &[f64]) -> Vec<f64> {
        self.assemble_load(u, |_, _, l| [0.0, 0.0, l])
    }

    /// S u.
    pub fn full_stiffness(&self, u: &[f64]) -> Vec<f64> {
        let c = self.problem.grad_coeff();
        let alpha = self.problem.alpha();
        self.assemble_load(u, |v, d, l| [alpha * v, c * d, l])
    }

    /// ∫ |u|^{q−2}u φ_a r^{N−1}.
    pub fn power_load(&self, u: &[f64], q: f64) -> Vec<f64> {
        self.assemble_load(u, |v, _, _| [v.abs().powf(q - 2.0) * v, 0.0, 0.0])
    }

    /// Galerkin −Δ_h u = M⁻¹A u.
    pub fn apply_neg_laplacian(&self, u: &[f64]) -> Vec<f64> {
        self.mass_factor.solve(&self.grad_stiffness(u))
    }

    /// Galerkin Δ_h² u = M⁻¹B u.
    pub fn apply_bilaplacian(&self, u: &[f64]) -> Vec<f64> {
        self.mass_factor.solve(&self.bilap_stiffness(u))
    }

    /// L_h u = M⁻¹S u.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.mass_factor.solve(&self.full_stiffness(u))
    }

    /// Solves S x = b.
    pub fn solve_full(&self, b: &[f64]) -> Vec<f64> {
        self.full_factor.solve(b)
    }

    fn integrate(&self, u: &[f64], f: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let mut sum = 0.0;
        self.for_each_point(u, |qp, v, d, l| sum += qp.weight * f(v, d, l));
        sum
    }

    /// ∫ |Δu|² r^{N−1}.
    pub fn bilap_energy(&self, u: &[f64]) -> f64 {
        self.integrate(u, |_, _, l| l * l)
    }

    /// ∫ |u′|² r^{N−1}.
    pub fn grad_energy(&self, u: &[f64]) -> f64 {
        self.integrate(u, |_, d, _| d * d)
    }

    /// ∫ u² r^{N−1}.
    pub fn l2_energy(&self, u: &[f64]) -> f64 {
        self.integrate(u, |v, _, _| v * v)
    }

    /// uᵀSu.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let c = self.problem.grad_coeff();
        let alpha = self.problem.alpha();
        self.integrate(u, |v, d, l| l * l + c * d * d + alpha * v * v)
    }

    /// uᵀMv.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.mass.bilinear(u, v)
    }

    /// ∫ |u|^q r^{N−1}.
    pub fn power_integral(&self, u: &[f64], q: f64) -> f64 {
        self.integrate(u, |v, _, _| v.abs().powf(q))
    }

    /// ∫ u r^{N−1}.
    pub fn integral(&self, u: &[f64]) -> f64 {
        self.integrate(u, |v, _, _| v)
    }

    /// Smallest value of the field over all quadrature points and nodes.
    pub fn min_value(&self, u: &[f64]) -> f64 {
        let mut lo = self.nodal_values(u).into_iter().fold(f64::INFINITY, f64::min);
        self.for_each_point(u, |_, v, _, _| lo = lo.min(v));
        lo
    }

    /// ∫ r^{N−1} = R^N/N.
    pub fn volume(&self) -> f64 {
        self.problem.radius().powf(self.problem.dims().nf()) / self.problem.dims().nf()
    }

    /// ∫u r^{N−1} / ∫r^{N−1}.
    pub fn mean(&self, u: &[f64]) -> f64 {
        self.integral(u) / self.volume()
    }

    /// ‖u − ū‖/‖ū‖ in the weighted L² norm.
    pub fn deviation(&self, u: &[f64]) -> f64 {
        let mean = self.mean(u);
        let spread = self.integrate(u, |v, _, _| (v - mean) * (v - mean));
        (spread / (mean * mean * self.volume())).sqrt()
    }

    /// The N-dimensional integrals of J and Q, with the exponent of the problem.
    pub fn breakdown(&self, u: &[f64]) -> QuotientBreakdown {
        let omega = self.problem.dims().sphere_area();
        let q_exp = self.problem.exponent_p() + 1.0;
        QuotientBreakdown::with_exponent(
            q_exp,
            self.problem.alpha(),
            omega * self.bilap_energy(u),
            omega * self.problem.grad_coeff() * self.grad_energy(u),
            omega * self.l2_energy(u),
            omega * self.power_integral(u, q_exp),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::DimensionParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn operator(n_dim: u32, radius: f64, alpha: f64, nodes: usize) -> DiscreteOperator {
        let problem = BallProblem::new(DimensionParams::new(n_dim).unwrap(), radius, alpha, nodes).unwrap();
        assemble_operator(&problem).unwrap()
    }

    #[test]
    fn gauss_rule_exact() {
        let rule = gauss_legendre(GAUSS_POINTS);
        for k in 0..24 {
            let got: f64 = rule.iter().map(|(t, w)| w * t.powi(k)).sum();
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-15, "degree {k}");
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let dims = DimensionParams::new(6).unwrap();
        assert!(matches!(BallProblem::new(dims, 1.0, 1.0, 15), Err(Error::Grid(_))));
    }

    #[test]
    fn constants_in_kernel() {
        let op = operator(6, 1.0, 3.0, 200);
        let ones = op.constant_dofs(1.0);
        let scale = (0..op.ndof()).map(|i| op.bilap.get(i, i).abs()).fold(0.0, f64::max);
        for v in op.grad_stiffness(&ones).iter().chain(op.bilap_stiffness(&ones).iter()) {
            assert!(v.abs() <= 1e-10 * scale, "{v}");
        }
        // assembled matrices agree up to round-off
        for v in op.bilap.matvec(&ones) {
            assert!(v.abs() <= 1e-10 * scale);
        }
        let mass_ones = op.mass.matvec(&ones);
        for (v, m) in op.full_stiffness(&ones).iter().zip(&mass_ones) {
            assert!((v - 3.0 * m).abs() <= 1e-12 * m.abs().max(1e-300));
        }
    }

    #[test]
    fn mass_is_ball_volume() {
        let op = operator(7, 1.3, 1.0, 101);
        let ones = op.constant_dofs(1.0);
        let vol = op.inner(&ones, &ones) * op.problem().dims().sphere_area();
        let want = crate::special::ball_volume(7, 1.3);
        assert!((vol - want).abs() < 1e-13 * want);
    }

    #[test]
    fn weighted_self_adjoint() {
        let op = operator(6, 1.0, 2.0, 257);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let u: Vec<f64> = (0..op.ndof()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..op.ndof()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let luv = op.inner(&op.apply(&u), &v);
            let ulv = op.inner(&u, &op.apply(&v));
            assert!((luv - ulv).abs() <= 1e-10 * luv.abs().max(1.0), "{luv} {ulv}");
        }
    }

    #[test]
    fn matrix_free_matches_assembled() {
        let op = operator(5, 1.0, 2.5, 64);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u: Vec<f64> = (0..op.ndof()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = op.full_stiffness(&u);
        let b = op.full.matvec(&u);
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10 * scale);
        }
        assert!((op.energy(&u) - op.full.bilinear(&u, &u)).abs() < 1e-10 * op.energy(&u));
    }

    // u = r⁶ + b r⁴ + c r² with u′(1) = (Δu)′(1) = 0
    fn admissible(n: f64) -> (f64, f64) {
        let b = -3.0 * (n + 4.0) / (n + 2.0);
        (b, -(6.0 + 4.0 * b) / 2.0)
    }

    #[test]
    fn bilaplacian_second_order() {
        for n_dim in [5u32, 6, 8] {
            let nf = f64::from(n_dim);
            let (b, c) = admissible(nf);
            let bilap = |r: f64| 24.0 * (nf + 4.0) * (nf + 2.0) * r * r + 8.0 * nf * (nf + 2.0) * b;
            let mut errs = Vec::new();
            for nodes in [33usize, 65, 129] {
                let op = operator(n_dim, 1.0, 1.0, nodes);
                let u = op.dofs_from_function(
                    |r| r.powi(6) + b * r.powi(4) + c * r * r,
                    |r| 6.0 * r.powi(5) + 4.0 * b * r.powi(3) + 2.0 * c * r,
                );
                let got = op.nodal_values(&op.apply_bilaplacian(&u));
                // pointwise consistency holds away from the axis, where M⁻¹B is only bounded
                let err = op
                    .problem()
                    .grid()
                    .nodes()
                    .iter()
                    .zip(&got)
                    .filter(|(r, _)| (0.25..=0.75).contains(*r))
                    .map(|(&r, g)| (g - bilap(r)).abs())
                    .fold(0.0, f64::max);
                errs.push(err);
            }
            for w in errs.windows(2) {
                let rate = (w[0] / w[1]).log2();
                assert!(rate > 1.8, "N={n_dim} rate {rate} errs {errs:?}");
            }
        }
    }

    #[test]
    fn energy_exact_on_cubics() {
        // a cubic spline with zero end slopes is represented exactly
        let n_dim = 6u32;
        let op = operator(n_dim, 1.0, 1.0, 17);
        let u = op.dofs_from_function(|r| 2.0 * r.powi(3) - 3.0 * r * r, |r| 6.0 * r * r - 6.0 * r);
        // Δu = 12r − 6 + 5(6r − 6) = 42r − 36
        let exact: f64 = (0..=2)
            .map(|k| {
                let coef = [36.0 * 36.0, -2.0 * 42.0 * 36.0, 42.0 * 42.0][k];
                coef / (6.0 + k as f64)
            })
            .sum();
        assert!((op.bilap_energy(&u) - exact).abs() < 1e-11 * exact);
    }

    #[test]
    fn constant_quotient_exact() {
        for (n_dim, radius, alpha) in [(5u32, 1.0, 2.0), (6, 1.0, 52.0), (8, 2.5, 0.3)] {
            let op = operator(n_dim, radius, alpha, 300);
            let dims = DimensionParams::new(n_dim).unwrap();
            let c = dims.constant_solution(alpha);
            let u = op.constant_dofs(c);
            let br = op.breakdown(&u);
            let vol = crate::special::ball_volume(n_dim, radius);
            let want = alpha * vol.powf(4.0 / f64::from(n_dim));
            assert!((br.q - want).abs() <= 1e-10 * want, "{} {want}", br.q);
            let residual: Vec<f64> = op
                .full_stiffness(&u)
                .iter()
                .zip(op.power_load(&u, dims.two_star()))
                .map(|(a, b)| a - b)
                .collect();
            let scale = op.power_load(&u, dims.two_star()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(residual.iter().all(|v| v.abs() < 1e-12 * scale));
        }
    }

    #[test]
    fn no_subcritical_spike() {
        // a single-element spike at the axis costs at least the sharp constant
        let dims = DimensionParams::new(6).unwrap();
        let op = operator(6, 1.0, 1.0, 512);
        let mut values = vec![0.0; 512];
        values[0] = 1.0;
        let u = op.dofs_from_parts(&values, &vec![0.0; 512]);
        assert!(op.breakdown(&u).q > dims.sobolev());
    }
}
