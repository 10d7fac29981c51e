//! Run configuration: clap flags layered over an optional JSON config file.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use paneitz_core::DimensionParams;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Closed-form constants in dimension N.
    Constants,
    /// Δ²u_ε − u_ε^p on a log grid of radii.
    BubbleResidual,
    /// J₁, J₂, J₃ and β_N against the Gamma closed form.
    Jintegrals,
    /// Half-space quotient, curvature expansion and secondary-norm orders.
    Asymptotics,
    /// Chart Jacobian at the origin and the O(|y|²) expansion error.
    GeometryCheck,
    /// Least-energy search on a ball from the perturbed constant solution.
    Minimize,
    /// α-bisection of the constant/nonconstant flip on a ball.
    Threshold,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Constants,
        Command::BubbleResidual,
        Command::Jintegrals,
        Command::Asymptotics,
        Command::GeometryCheck,
        Command::Minimize,
        Command::Threshold,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::BubbleResidual => "bubble-residual",
            Command::Jintegrals => "jintegrals",
            Command::Asymptotics => "asymptotics",
            Command::GeometryCheck => "geometry-check",
            Command::Minimize => "minimize",
            Command::Threshold => "threshold",
        }
    }

    fn needs_ball(&self) -> bool {
        matches!(self, Command::Minimize | Command::Threshold)
    }
}

#[derive(Debug, Parser)]
#[command(name = "paneitz", version, about = "Numerics for Δ²u − Δu + αu = |u|^{8/(N−4)}u with Neumann conditions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Settings,
    /// JSON config file; flags take precedence over its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Also write SVG line charts of the sweeps.
    #[arg(long, global = true)]
    pub svg: bool,
}

/// Every overridable setting. All optional so that flags, file sections and defaults can be merged.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Dimension N ≥ 5.
    #[arg(long = "dim", global = true)]
    #[serde(default)]
    pub dim: Option<u32>,
    /// Ball radius, or "half-space".
    #[arg(long, global = true, value_parser = parse_domain)]
    #[serde(default, deserialize_with = "domain_from_json")]
    pub radius: Option<Domain>,
    #[arg(long, global = true)]
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Concentration scale; repeat for a sweep.
    #[arg(long, global = true)]
    #[serde(default)]
    pub eps: Option<Vec<f64>>,
    /// Principal curvature; repeat N−1 times or give once for all.
    #[arg(long, global = true)]
    #[serde(default)]
    pub kappa: Option<Vec<f64>>,
    /// Radial grid size.
    #[arg(long, global = true)]
    #[serde(default)]
    pub grid: Option<usize>,
    /// Flow tolerance.
    #[arg(long, global = true)]
    #[serde(default)]
    pub tol: Option<f64>,
    /// Cap on gradient-flow iterations.
    #[arg(long = "max-iter", global = true)]
    #[serde(default, rename = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long = "out-dir", global = true)]
    #[serde(default, rename = "out-dir")]
    pub out_dir: Option<PathBuf>,
    #[arg(skip)]
    #[serde(default)]
    pub svg: Option<bool>,
}

impl Settings {
    /// Values set in `over` replace those in `self`.
    fn overlay(self, over: Settings) -> Settings {
        Settings {
            dim: over.dim.or(self.dim),
            radius: over.radius.or(self.radius),
            alpha: over.alpha.or(self.alpha),
            eps: over.eps.or(self.eps),
            kappa: over.kappa.or(self.kappa),
            grid: over.grid.or(self.grid),
            tol: over.tol.or(self.tol),
            max_iter: over.max_iter.or(self.max_iter),
            out_dir: over.out_dir.or(self.out_dir),
            svg: over.svg.or(self.svg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Ball(f64),
    HalfSpace,
}

fn parse_domain(s: &str) -> Result<Domain, String> {
    if s.eq_ignore_ascii_case("half-space") {
        return Ok(Domain::HalfSpace);
    }
    let r: f64 = s.parse().map_err(|_| format!("expected a radius or \"half-space\", got {s:?}"))?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(format!("radius must be positive and finite, got {r}"));
    }
    Ok(Domain::Ball(r))
}

fn domain_from_json<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Domain>, D::Error> {
    let v = Value::deserialize(d)?;
    match v {
        Value::Null => Ok(None),
        Value::Number(n) => parse_domain(&n.to_string()).map(Some).map_err(serde::de::Error::custom),
        Value::String(s) => parse_domain(&s).map(Some).map_err(serde::de::Error::custom),
        other => Err(serde::de::Error::custom(format!("invalid radius {other}"))),
    }
}

/// Validated configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub dims: u32,
    pub domain: Domain,
    pub alpha: f64,
    pub eps: Vec<f64>,
    pub kappas: Vec<f64>,
    pub grid: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Left out of the JSON so that reports do not depend on where they are written.
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub svg: bool,
}

impl RunConfig {
    pub fn dimension(&self) -> DimensionParams {
        DimensionParams::new(self.dims).expect("validated at parse time")
    }

    pub fn radius(&self) -> Option<f64> {
        match self.domain {
            Domain::Ball(r) => Some(r),
            Domain::HalfSpace => None,
        }
    }
}

pub fn parse_args<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut cli = Cli::try_parse_from(args)?;
    if cli.svg {
        cli.flags.svg = Some(true);
    }
    let file = match &cli.config {
        Some(path) => read_config_file(path, cli.command)?,
        None => Settings::default(),
    };
    resolve(cli.command, file.overlay(cli.flags))
}

/// Top-level keys apply to every command; a key named after a command holds overrides for it.
fn read_config_file(path: &Path, command: Command) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let Value::Object(mut top) = doc else {
        return Err(CliError::Usage("config must be a JSON object".into()));
    };
    let mut section = None;
    for c in Command::ALL {
        if let Some(v) = top.remove(c.name()) {
            if c == command {
                section = Some(v);
            }
        }
    }
    let base = settings_from(Value::Object(top))?;
    let over = match section {
        Some(v) => settings_from(v)?,
        None => Settings::default(),
    };
    Ok(base.overlay(over))
}

fn settings_from(v: Value) -> Result<Settings, CliError> {
    let v = if v.is_null() { Value::Object(Map::new()) } else { v };
    serde_json::from_value(v).map_err(|e| CliError::Usage(format!("config: {e}")))
}

fn default_eps(command: Command) -> Vec<f64> {
    match command {
        Command::BubbleResidual => vec![0.5, 1.0],
        _ => vec![1e-1, 1e-2, 1e-3],
    }
}

fn resolve(command: Command, s: Settings) -> Result<RunConfig, CliError> {
    let usage = |m: String| Err(CliError::Usage(m));
    let Some(dims) = s.dim else {
        return usage("--dim is required".into());
    };
    if let Err(e) = DimensionParams::new(dims) {
        return usage(format!("--dim {dims}: {e}"));
    }
    let domain = s.radius.unwrap_or(if command == Command::Asymptotics {
        Domain::HalfSpace
    } else {
        Domain::Ball(1.0)
    });
    if command.needs_ball() && domain == Domain::HalfSpace {
        return usage(format!("{} needs a ball radius, not the half-space", command.name()));
    }
    let alpha = s.alpha.unwrap_or(1.0);
    if !(alpha > 0.0 && alpha.is_finite()) {
        return usage(format!("--alpha must be positive, got {alpha}"));
    }
    let eps = s.eps.unwrap_or_else(|| default_eps(command));
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return usage(format!("--eps values must be positive, got {eps:?}"));
    }
    if command == Command::Asymptotics && eps.iter().any(|e| *e > 0.25) {
        return usage("asymptotics needs eps ≤ 0.25".into());
    }
    let nk = dims as usize - 1;
    let kappas = match s.kappa {
        None => vec![1.0; nk],
        Some(k) if k.len() == 1 => vec![k[0]; nk],
        Some(k) if k.len() == nk => k,
        Some(k) => return usage(format!("--kappa needs 1 or {nk} values, got {}", k.len())),
    };
    if kappas.iter().any(|k| !k.is_finite()) {
        return usage("--kappa values must be finite".into());
    }
    let grid = s.grid.unwrap_or(512);
    if grid < 16 {
        return usage(format!("--grid must be at least 16, got {grid}"));
    }
    let tol = s.tol.unwrap_or(1e-10);
    if !(tol > 0.0 && tol < 1.0) {
        return usage(format!("--tol must lie in (0, 1), got {tol}"));
    }
    let max_iter = s.max_iter.unwrap_or(50_000);
    if max_iter == 0 {
        return usage("--max-iter must be positive".into());
    }
    Ok(RunConfig {
        command,
        dims,
        domain,
        alpha,
        eps,
        kappas,
        grid,
        tol,
        max_iter,
        out_dir: s.out_dir.unwrap_or_else(|| PathBuf::from("out")),
        svg: s.svg.unwrap_or(false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn parse(args: &[&str]) -> Result<RunConfig, CliError> {
        parse_args(std::iter::once("paneitz").chain(args.iter().copied()))
    }

    #[test]
    fn constants_with_dim() {
        let c = parse(&["constants", "--dim", "6"]).unwrap();
        assert_eq!(c.command, Command::Constants);
        assert_eq!(c.dims, 6);
        assert_eq!(c.domain, Domain::Ball(1.0));
    }

    #[test]
    fn dimension_four_rejected() {
        let err = parse(&["constants", "--dim", "4"]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn malformed_and_unknown_rejected() {
        assert_eq!(parse(&["constants", "--dim", "six"]).unwrap_err().exit_code(), 1);
        assert_eq!(parse(&["frobnicate", "--dim", "6"]).unwrap_err().exit_code(), 1);
        assert_eq!(parse(&["minimize", "--dim", "6", "--radius", "half-space"]).unwrap_err().exit_code(), 1);
        assert_eq!(parse(&["minimize", "--dim", "6", "--radius", "-1"]).unwrap_err().exit_code(), 1);
        assert_eq!(parse(&["geometry-check", "--dim", "6", "--kappa", "1", "--kappa", "2"]).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn repeated_flags_collect() {
        let c = parse(&["asymptotics", "--dim", "5", "--eps", "0.01", "--eps", "0.001", "--kappa", "2"]).unwrap();
        assert_eq!(c.eps, vec![0.01, 0.001]);
        assert_eq!(c.kappas, vec![2.0; 4]);
        assert_eq!(c.domain, Domain::HalfSpace);
    }

    #[test]
    fn flags_override_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(
            f,
            r#"{{"dim": 7, "alpha": 2.0, "grid": 64, "minimize": {{"alpha": 5.0, "radius": 2}}, "threshold": {{"grid": 32}}}}"#
        )
        .unwrap();
        let path = f.path().to_str().unwrap();
        let c = parse(&["minimize", "--config", path]).unwrap();
        assert_eq!((c.dims, c.alpha, c.grid, c.domain), (7, 5.0, 64, Domain::Ball(2.0)));
        let c = parse(&["minimize", "--config", path, "--alpha", "3.0"]).unwrap();
        assert_eq!(c.alpha, 3.0);
        let c = parse(&["threshold", "--config", path]).unwrap();
        assert_eq!((c.alpha, c.grid), (2.0, 32));
    }

    #[test]
    fn unknown_file_key_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, r#"{{"dim": 6, "alhpa": 2.0}}"#).unwrap();
        let err = parse(&["constants", "--config", f.path().to_str().unwrap()]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
