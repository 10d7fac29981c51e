//! One function per subcommand; each returns a [`Report`] and never touches the filesystem.

use paneitz_core::bubble::{bubble_pde_residual, BubbleParams};
use paneitz_core::chart::{jacobian_expansion_error, phi_jacobian, scaling_slope, CurvatureModel};
use paneitz_core::minimizer::{
    assemble_operator, balance_check, first_neumann_mode, minimize_dofs, perturbed_constant, threshold_scan,
    BallProblem, FlowOptions, ThresholdResult, SEED_AMPLITUDE,
};
use paneitz_core::quadrature::{j_integrals, JIntegrals, QuadratureSpec};
use paneitz_core::rayleigh::{
    curvature_slopes, curvature_sweep, expected_secondary_orders, fit_window, halfspace_bubble_breakdown,
    log_spaced, secondary_norm_orders, CurvatureSample, SWEEP_R0,
};
use paneitz_core::special::{ball_volume, beta_closed_form};
use paneitz_core::Error;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::report::{fmt_num, Chart, Check, Report, Series, Table};

const RESIDUAL_TOL: f64 = 1e-8;
const BETA_SPLIT_TOL: f64 = 1e-10;
const BETA_FACTOR_TOL: f64 = 1e-8;
const SLOPE_TOL: f64 = 0.10;
const LOG_SLOPE_TOL: f64 = 0.15;
const ORDER_TOL: f64 = 0.2;
const CHART_SLOPE_TOL: f64 = 0.1;
const IDENTITY_TOL: f64 = 1e-14;
const BALANCE_TOL: f64 = 1e-6;

pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    match config.command {
        Command::Constants => constants(config),
        Command::BubbleResidual => bubble_residual(config),
        Command::Jintegrals => jintegrals(config),
        Command::Asymptotics => asymptotics(config),
        Command::GeometryCheck => geometry_check(config),
        Command::Minimize => minimize(config),
        Command::Threshold => threshold(config),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    Ok(serde_json::to_value(v)?)
}

fn constants(config: &RunConfig) -> Result<Report, CliError> {
    let d = config.dimension();
    let n = d.n();
    let mut results = json!({
        "n": n,
        "two_star": d.two_star(),
        "critical_power": d.critical_power(),
        "gamma_n": d.gamma_n(),
        "sobolev": d.sobolev(),
        "sobolev_energy": d.sobolev_energy(),
        "half_space_constant": d.half_space_constant(),
        "d_n": d.d_n(),
        "sphere_area": d.sphere_area(),
        "beta_gamma_factor": beta_closed_form(n)?,
        "beta_prefactor": JIntegrals::beta_prefactor(n)?,
    });
    let mut report = Report::new(Value::Null);
    for (key, op) in [
        ("n", "special::DimensionParams::n"),
        ("two_star", "special::DimensionParams::two_star"),
        ("critical_power", "special::DimensionParams::critical_power"),
        ("gamma_n", "special::bubble_normalizer"),
        ("sobolev", "special::sobolev_constant"),
        ("sobolev_energy", "special::DimensionParams::sobolev_energy"),
        ("half_space_constant", "special::DimensionParams::half_space_constant"),
        ("d_n", "special::DimensionParams::d_n"),
        ("sphere_area", "special::sphere_area"),
        ("beta_gamma_factor", "special::beta_closed_form"),
        ("beta_prefactor", "quadrature::JIntegrals::beta_prefactor"),
    ] {
        report.source(key, op);
    }
    if let Some(radius) = config.radius() {
        let volume = ball_volume(n, radius);
        let alpha = config.alpha;
        results["radius"] = json!(radius);
        results["alpha"] = json!(alpha);
        results["volume"] = json!(volume);
        results["alpha_bar"] = json!(d.alpha_bar(volume)?);
        results["constant_solution"] = json!(d.constant_solution(alpha));
        results["constant_quotient"] = json!(alpha * volume.powf(4.0 / d.nf()));
        report.source("volume", "special::ball_volume");
        report.source("alpha_bar", "special::alpha_bar");
        report.source("constant_solution", "special::DimensionParams::constant_solution");
        report.source("constant_quotient", "special::ball_volume");
    }
    report.results = results;
    Ok(report)
}

fn bubble_residual(config: &RunConfig) -> Result<Report, CliError> {
    let d = config.dimension();
    let radii = log_spaced(1e-3, 10.0, 200);
    let p = d.critical_power();
    let sweeps: Vec<(f64, Vec<[f64; 5]>)> = config
        .eps
        .par_iter()
        .map(|&eps| {
            let b = BubbleParams::new(d, eps)?;
            let rows = radii
                .iter()
                .map(|&r| {
                    let u = b.value(r);
                    [r, u, b.laplacian(r), b.bilaplacian(r), bubble_pde_residual(&b, r)]
                })
                .collect();
            Ok((eps, rows))
        })
        .collect::<Result<_, Error>>()?;

    let mut table = Table::new("profile", &["eps", "r", "value", "laplacian", "bilaplacian", "power", "residual"]);
    let mut per_eps = Vec::new();
    let mut report = Report::new(Value::Null);
    let mut series = Vec::new();
    for (eps, rows) in &sweeps {
        let mut worst = 0.0f64;
        for row in rows {
            worst = worst.max(row[4].abs());
            table.push(vec![
                fmt_num(*eps),
                fmt_num(row[0]),
                fmt_num(row[1]),
                fmt_num(row[2]),
                fmt_num(row[3]),
                fmt_num(row[1].powf(p)),
                fmt_num(row[4]),
            ]);
        }
        report.checks.push(Check::at_most(format!("max |residual| at eps {eps}"), worst, RESIDUAL_TOL));
        per_eps.push(json!({"eps": eps, "max_abs_residual": worst}));
        series.push(Series {
            label: format!("eps = {eps}"),
            points: rows.iter().map(|r| (r[0], r[4])).collect(),
        });
    }
    report.results = json!({"n": d.n(), "r_min": 1e-3, "r_max": 10.0, "points": radii.len(), "sweeps": per_eps});
    report.source("sweeps", "bubble::bubble_pde_residual");
    report.tables.push(table);
    report.charts.push(Chart {
        name: "residual",
        title: format!("bubble PDE residual, N = {}", d.n()),
        x_label: "r",
        log_x: true,
        series,
    });
    Ok(report)
}

fn jintegrals(config: &RunConfig) -> Result<Report, CliError> {
    let n = config.dims;
    let spec = QuadratureSpec::new(1e-15, 1e-13, 4000)?;
    let j = j_integrals(n, &spec)?;
    let split = j.j1 / (f64::from(n) + 2.0) - j.j3;
    let gamma_factor = beta_closed_form(n)?;
    let prefactor = JIntegrals::beta_prefactor(n)?;
    let closed = prefactor * gamma_factor;
    let rel = ((j.beta_n - closed) / closed).abs();

    let mut table = Table::new(
        "values",
        &["n", "J1", "J2", "J3", "beta_N", "beta_direct", "gamma_factor", "prefactor", "beta_closed_form", "closed_form_rel_error"],
    );
    table.push(vec![
        n.to_string(),
        fmt_num(j.j1),
        j.j2.map(fmt_num).unwrap_or_default(),
        fmt_num(j.j3),
        fmt_num(j.beta_n),
        fmt_num(j.beta_direct),
        fmt_num(gamma_factor),
        fmt_num(prefactor),
        fmt_num(closed),
        fmt_num(rel),
    ]);
    let mut report = Report::new(json!({
        "integrals": j,
        "beta_split": split,
        "gamma_factor": gamma_factor,
        "prefactor": prefactor,
        "beta_closed_form": closed,
        "closed_form_rel_error": rel,
    }));
    report.source("integrals", "quadrature::j_integrals");
    report.source("beta_split", "quadrature::j_integrals");
    report.source("gamma_factor", "special::beta_closed_form");
    report.source("prefactor", "quadrature::JIntegrals::beta_prefactor");
    report.checks.push(Check::at_most("beta_N positive (−beta_N)", -j.beta_n, 0.0));
    report.checks.push(Check::at_most("|beta_direct − (J1/(N+2) − J3)|", (j.beta_direct - split).abs(), BETA_SPLIT_TOL));
    report.checks.push(Check::at_most("beta_N vs closed form (relative)", rel, BETA_FACTOR_TOL));
    report.tables.push(table);
    Ok(report)
}

fn asymptotics(config: &RunConfig) -> Result<Report, CliError> {
    let d = config.dimension();
    let n = d.n();
    let spec = QuadratureSpec::default();
    let mut report = Report::new(Value::Null);

    // half-space quotient of the glued bubble
    let target = d.half_space_constant();
    let half: Vec<_> = config
        .eps
        .par_iter()
        .map(|&e| halfspace_bubble_breakdown(d, config.alpha, e, &spec))
        .collect::<Result<_, Error>>()?;
    let mut table = Table::new("halfspace", &["eps", "lap2", "grad2", "l2", "lp", "j", "q", "half_space_constant"]);
    for (e, b) in config.eps.iter().zip(&half) {
        table.push(vec![
            fmt_num(*e),
            fmt_num(b.lap2),
            fmt_num(b.grad2),
            fmt_num(b.l2),
            fmt_num(b.lp),
            fmt_num(b.j),
            fmt_num(b.q),
            fmt_num(target),
        ]);
        report.checks.push(Check::at_most(format!("half-space constant below Q at eps {e}"), target - b.q, 0.0));
    }
    report.tables.push(table);
    report.charts.push(Chart {
        name: "halfspace",
        title: format!("Q_alpha(z_eps) on the half-space, N = {n}, alpha = {}", config.alpha),
        x_label: "eps",
        log_x: true,
        series: vec![
            Series {
                label: "Q".into(),
                points: config.eps.iter().zip(&half).map(|(e, b)| (*e, b.q)).collect(),
            },
            Series {
                label: "S/2^(4/N)".into(),
                points: config.eps.iter().map(|e| (*e, target)).collect(),
            },
        ],
    });

    // curvature expansion over the slope window
    let model = CurvatureModel::new(config.kappas.clone())?;
    let window = fit_window();
    let samples: Vec<CurvatureSample> = window
        .par_iter()
        .map(|&e| curvature_sweep(d, &model, SWEEP_R0, &[e], &spec).map(|mut v| v.remove(0)))
        .collect::<Result<_, Error>>()?;
    let mut table = Table::new("curvature", &["eps", "i1", "i2", "i3", "i4", "sum", "predicted", "lp_flat", "lp_tilt"]);
    for s in &samples {
        let t = &s.terms;
        table.push(vec![
            fmt_num(s.eps),
            fmt_num(t.i1),
            fmt_num(t.i2),
            fmt_num(t.i3),
            fmt_num(t.i4),
            fmt_num(t.sum()),
            fmt_num(t.predicted),
            fmt_num(s.lp_flat),
            fmt_num(s.lp_tilt),
        ]);
    }
    report.tables.push(table);
    let curvature = if model.h() > 0.0 {
        let slopes = curvature_slopes(d, &model, &samples, &spec)?;
        if let Some(c) = slopes.i23 {
            report.checks.push(Check::at_most("I2+I3 slope (relative)", c.relative_error(), SLOPE_TOL));
        }
        let i4_tol = if n == 5 { LOG_SLOPE_TOL } else { SLOPE_TOL };
        report.checks.push(Check::at_most("I4 slope (relative)", slopes.i4.relative_error(), i4_tol));
        report.checks.push(Check::at_most("critical-norm slope (relative)", slopes.lp.relative_error(), SLOPE_TOL));
        to_value(&slopes)?
    } else {
        json!({"skipped": model.warning()})
    };

    // secondary norms
    let orders = secondary_norm_orders(d, &window, &spec)?;
    let (want_grad, want_l2) = expected_secondary_orders(n);
    let mut table = Table::new("secondary", &["eps", "grad2", "l2"]);
    for ((e, g), l) in orders.eps.iter().zip(&orders.grad2).zip(&orders.l2) {
        table.push(vec![fmt_num(*e), fmt_num(*g), fmt_num(*l)]);
    }
    report.tables.push(table);
    for (name, got, want) in [("grad", &orders.grad2_order, want_grad), ("l2", &orders.l2_order, want_l2)] {
        report.checks.push(Check {
            name: format!("{name} order {} (expected {})", got.class.label(), want.label()),
            value: got.exponent,
            limit: f64::from(want.power),
            pass: got.class == want && (got.exponent - f64::from(want.power)).abs() <= ORDER_TOL,
        });
    }
    report.charts.push(Chart {
        name: "curvature",
        title: format!("curvature terms, N = {n}, H = {}", model.h()),
        x_label: "eps",
        log_x: true,
        series: vec![
            Series {
                label: "I2+I3".into(),
                points: samples.iter().map(|s| (s.eps, s.terms.i2 + s.terms.i3)).collect(),
            },
            Series {
                label: "I4".into(),
                points: samples.iter().map(|s| (s.eps, s.terms.i4)).collect(),
            },
        ],
    });

    report.results = json!({
        "n": n,
        "alpha": config.alpha,
        "half_space": {"target": target, "eps": config.eps, "q": half.iter().map(|b| b.q).collect::<Vec<_>>()},
        "curvature": curvature,
        "secondary": {
            "grad2_order": orders.grad2_order,
            "l2_order": orders.l2_order,
            "expected_grad2": want_grad,
            "expected_l2": want_l2,
        },
    });
    report.source("half_space", "rayleigh::halfspace_bubble_breakdown");
    report.source("curvature", "rayleigh::curvature_slopes");
    report.source("secondary", "rayleigh::secondary_norm_orders");
    Ok(report)
}

fn geometry_check(config: &RunConfig) -> Result<Report, CliError> {
    let model = CurvatureModel::new(config.kappas.clone())?;
    let n = model.n() as usize;
    let mut report = Report::new(Value::Null);

    let origin = vec![0.0; n];
    let jac = phi_jacobian(&model, &origin)?;
    let deviation = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (jac[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    report.checks.push(Check::at_most("|DPhi(0,0) − I|", deviation, IDENTITY_TOL));

    // unit directions, shrunk so that t·y stays inside the chart for t ≤ 1e−1
    let length = (0.9 * model.chart_radius() / 0.1).min(1.0);
    let mut directions: Vec<(&str, Vec<f64>)> = Vec::new();
    let mut normal = vec![0.0; n];
    normal[n - 1] = 1.0;
    directions.push(("normal", normal));
    let mut tangent_normal = vec![0.0; n];
    tangent_normal[0] = 1.0;
    tangent_normal[n - 1] = 1.0;
    directions.push(("tangent+normal", tangent_normal));
    directions.push(("diagonal", vec![1.0; n]));
    for (_, y) in directions.iter_mut() {
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v *= length / norm);
    }
    let ts = log_spaced(1e-3, 1e-1, 9);
    let mut table = Table::new("expansion", &["direction", "t", "abs_y", "error"]);
    let mut slopes = Vec::new();
    for (name, y) in &directions {
        for &t in &ts {
            let p: Vec<f64> = y.iter().map(|v| t * v).collect();
            table.push(vec![
                name.to_string(),
                fmt_num(t),
                fmt_num(t * length),
                fmt_num(jacobian_expansion_error(&model, &p)?),
            ]);
        }
        let slope = scaling_slope(&model, y, &ts, jacobian_expansion_error)?;
        report.checks.push(Check::at_most(format!("|slope − 2| along {name}"), (slope - 2.0).abs(), CHART_SLOPE_TOL));
        slopes.push(json!({"direction": name, "slope": slope}));
    }
    report.results = json!({
        "n": n,
        "kappas": model.kappas(),
        "h": model.h(),
        "chart_radius": model.chart_radius(),
        "warning": model.warning(),
        "identity_deviation": deviation,
        "expansion_slopes": slopes,
    });
    report.source("identity_deviation", "chart::phi_jacobian");
    report.source("expansion_slopes", "chart::scaling_slope");
    report.tables.push(table);
    Ok(report)
}

fn ball_problem(config: &RunConfig) -> Result<BallProblem, CliError> {
    let radius = config.radius().ok_or_else(|| CliError::Usage("a ball radius is required".into()))?;
    Ok(BallProblem::new(config.dimension(), radius, config.alpha, config.grid)?)
}

fn flow_options(config: &RunConfig) -> FlowOptions {
    FlowOptions {
        tol: config.tol,
        max_iter: config.max_iter,
        ..FlowOptions::default()
    }
}

fn minimize(config: &RunConfig) -> Result<Report, CliError> {
    let problem = ball_problem(config)?;
    let op = assemble_operator(&problem)?;
    let mode = first_neumann_mode(&op)?;
    let init = perturbed_constant(&op, &mode.eigenfield, SEED_AMPLITUDE);
    let r = minimize_dofs(&op, &init, &flow_options(config))?;
    let d = problem.dims();
    let constant_level = problem.alpha() * problem.volume().powf(4.0 / d.nf());
    let balance = match balance_check(&r, &problem) {
        Ok(b) => to_value(&b)?,
        Err(Error::NotApplicable(why)) => json!({"not_applicable": why}),
        Err(e) => return Err(e.into()),
    };

    let mut report = Report::new(json!({
        "classification": r.classification,
        "q": r.breakdown.q,
        "q_init": r.q_init,
        "breakdown": r.breakdown,
        "iterations": r.iterations,
        "converged": r.converged,
        "residual": r.residual,
        "deviation": r.deviation,
        "multiplier": r.multiplier,
        "constant_level": constant_level,
        "sobolev": d.sobolev(),
        "lambda1": mode.lambda1,
        "alpha_lin": mode.lambda1 / (problem.exponent_p() - 1.0),
        "alpha_bar": problem.alpha_bar()?,
        "centre_value": r.field.values[0],
        "balance": balance,
    }));
    report.converged = r.converged;
    if let Some(defect) = report.results["balance"]["defect"].as_f64() {
        report.checks.push(Check::at_most("balance defect", defect, BALANCE_TOL));
    }
    for key in ["classification", "q", "q_init", "breakdown", "iterations", "converged", "residual", "deviation", "multiplier", "centre_value"] {
        report.source(key, "minimizer::minimize_dofs");
    }
    report.source("lambda1", "minimizer::first_neumann_mode");
    report.source("alpha_lin", "minimizer::first_neumann_mode");
    report.source("alpha_bar", "special::alpha_bar");
    report.source("constant_level", "special::ball_volume");
    report.source("sobolev", "special::sobolev_constant");
    report.source("balance", "minimizer::balance_check");

    let mut profile = Table::new("profile", &["r", "u", "du"]);
    let nodes = problem.grid().nodes();
    for ((r_i, u), du) in nodes.iter().zip(&r.field.values).zip(&r.slopes) {
        profile.push(vec![fmt_num(*r_i), fmt_num(*u), fmt_num(*du)]);
    }
    let mut history = Table::new("history", &["step", "q"]);
    for (i, q) in r.history.iter().enumerate() {
        history.push(vec![i.to_string(), fmt_num(*q)]);
    }
    report.tables.push(profile);
    report.tables.push(history);
    report.charts.push(Chart {
        name: "profile",
        title: format!("radial profile, N = {}, alpha = {}", d.n(), problem.alpha()),
        x_label: "r",
        log_x: false,
        series: vec![Series {
            label: r.classification.label().into(),
            points: nodes.iter().copied().zip(r.field.values.iter().copied()).collect(),
        }],
    });
    Ok(report)
}

fn threshold(config: &RunConfig) -> Result<Report, CliError> {
    let problem = ball_problem(config)?;
    let opts = flow_options(config);
    let op = assemble_operator(&problem)?;
    let alpha_lin = first_neumann_mode(&op)?.lambda1 / (problem.exponent_p() - 1.0);
    let alpha_bar = problem.alpha_bar()?;
    let lo = 1e-2 * alpha_lin;
    let width = 1e-2 * alpha_lin;

    // ᾱ first; when it still classifies CONSTANT the scan is repeated up to 2α_lin
    let (scan, upper_end, first_attempt) = match threshold_scan(&problem, lo, alpha_bar, width, &opts) {
        Ok(t) => (t, "alpha_bar", None),
        Err(Error::Bracketing(why)) => {
            let t = threshold_scan(&problem, lo, 2.0 * alpha_lin, width, &opts)?;
            (t, "2 alpha_lin", Some(why))
        }
        Err(e) => return Err(e.into()),
    };
    threshold_report(scan, upper_end, first_attempt, alpha_bar)
}

fn threshold_report(
    t: ThresholdResult,
    upper_end: &str,
    first_attempt: Option<String>,
    alpha_bar: f64,
) -> Result<Report, CliError> {
    let mut table = Table::new("scan", &["alpha", "classification", "deviation", "q", "converged", "iterations"]);
    let mut sorted = t.points.clone();
    sorted.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    for p in &sorted {
        table.push(vec![
            fmt_num(p.alpha),
            p.classification.label().into(),
            fmt_num(p.deviation),
            fmt_num(p.q),
            p.converged.to_string(),
            p.iterations.to_string(),
        ]);
    }
    let converged = t.points.iter().all(|p| p.converged);
    let mut report = Report::new(json!({
        "alpha_star_bracket": [t.alpha_star_bracket.0, t.alpha_star_bracket.1],
        "alpha_lin": t.alpha_lin,
        "alpha_bar": alpha_bar,
        "lambda1": t.lambda1,
        "within_alpha_bar": t.within_alpha_bar,
        "upper_end": upper_end,
        "fallback": first_attempt.is_some(),
        "first_attempt": first_attempt,
        "points": t.points,
    }));
    report.converged = converged;
    report.source("alpha_star_bracket", "minimizer::threshold_scan");
    report.source("points", "minimizer::threshold_scan");
    report.source("alpha_lin", "minimizer::first_neumann_mode");
    report.source("lambda1", "minimizer::first_neumann_mode");
    report.source("alpha_bar", "special::alpha_bar");
    report.charts.push(Chart {
        name: "scan",
        title: "deviation from the constant along the α-scan".into(),
        x_label: "alpha",
        log_x: false,
        series: vec![Series {
            label: "deviation".into(),
            points: sorted.iter().map(|p| (p.alpha, p.deviation)).collect(),
        }],
    });
    report.tables.push(table);
    Ok(report)
}
