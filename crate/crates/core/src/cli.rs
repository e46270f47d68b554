//! Command-line front end: `coeffs`, `times` and `validate`.
//!
//! Exit codes: 0 on success, 1 when a validation fails, 2 on bad input.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::channels::{Scenario, Side};
use crate::error::Error;
use crate::grid::KGrid;
use crate::oracle::{validate, Domain, OracleConfig};
use crate::potential::{scatter_coeffs, Barrier};
use crate::timing::time_report;
use crate::units::Units;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qscatter", version, about = "Channel-resolved 1D scattering by piecewise-constant barriers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate T, R, J, F, J', F' as CSV.
    Coeffs(CoeffsArgs),
    /// Characteristic times of a Gaussian scenario as JSON.
    Times(TimesArgs),
    /// Compare the analytic description with a split-step propagation (JSON).
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    /// Barrier file: `a <value>` then `<width> <height>` per line.
    pub barrier: PathBuf,
    #[arg(long)]
    pub kmin: f64,
    #[arg(long)]
    pub kmax: f64,
    #[arg(long, default_value_t = 2048)]
    pub n: usize,
    /// Scale factors `hbar,m` for heights given in physical units.
    #[arg(long, value_parser = parse_units)]
    pub units: Option<Units>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Barrier file: `a <value>` then `<width> <height>` per line.
    pub barrier: PathBuf,
    #[arg(long, default_value = "left", value_parser = parse_side)]
    pub side: Side,
    #[arg(long)]
    pub k0: f64,
    #[arg(long)]
    pub l0: f64,
    /// Override the left edge of the barrier.
    #[arg(long)]
    pub a: Option<f64>,
    /// Start of a right-side packet.
    #[arg(long)]
    pub xr: Option<f64>,
    /// Number of positive k-grid nodes.
    #[arg(long, default_value_t = 2048)]
    pub n: usize,
    /// Scale factors `hbar,m`; times are read and written in these units.
    #[arg(long, value_parser = parse_units)]
    pub units: Option<Units>,
}

#[derive(Debug, Args)]
pub struct TimesArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long = "L1")]
    pub l1: f64,
    #[arg(long = "L2")]
    pub l2: f64,
    /// Also report the narrow-packet scattering lengths.
    #[arg(long)]
    pub narrow: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long = "t-final")]
    pub t_final: f64,
    #[arg(long)]
    pub dt: f64,
    /// Largest spatial step of the propagation grid.
    #[arg(long, default_value_t = 0.0625)]
    pub dx: f64,
    /// Explicit domain `x_min,x_max,n` instead of the automatic one.
    #[arg(long, value_parser = parse_domain)]
    pub domain: Option<Domain>,
}

fn parse_units(s: &str) -> Result<Units, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err("expected 'hbar,m'".into());
    }
    let hbar: f64 = parts[0].parse().map_err(|_| format!("bad hbar '{}'", parts[0]))?;
    let mass: f64 = parts[1].parse().map_err(|_| format!("bad mass '{}'", parts[1]))?;
    Units::new(hbar, mass).ok_or_else(|| "hbar and m must be positive".into())
}

fn parse_side(s: &str) -> Result<Side, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_domain(s: &str) -> Result<Domain, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err("expected 'x_min,x_max,n'".into());
    }
    let x_min: f64 = parts[0].parse().map_err(|_| format!("bad x_min '{}'", parts[0]))?;
    let x_max: f64 = parts[1].parse().map_err(|_| format!("bad x_max '{}'", parts[1]))?;
    let n: usize = parts[2].parse().map_err(|_| format!("bad n '{}'", parts[2]))?;
    Ok(Domain { x_min, x_max, n })
}

/// Failure of a subcommand, tagged with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::StepSize(_) | Error::Domain(_) | Error::Consistency(_) => EXIT_VALIDATION,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_INPUT, message: e.to_string() }
    }
}

fn load_barrier(path: &PathBuf, units: Units, a: Option<f64>) -> Result<Barrier, Failure> {
    let barrier = Barrier::from_file(path).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    })?;
    let barrier = barrier.scaled_heights(units.potential_to_internal(1.0));
    Ok(match a {
        Some(a) => barrier.shifted_to(a)?,
        None => barrier,
    })
}

/// Run the CLI on `args`, writing results to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Coeffs(args) => cmd_coeffs(&args, out),
        Command::Times(args) => cmd_times(&args, out),
        Command::Validate(args) => cmd_validate(&args, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn cmd_coeffs(args: &CoeffsArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let units = args.units.unwrap_or_default();
    let barrier = load_barrier(&args.barrier, units, None)?;
    let grid = Arc::new(KGrid::uniform(args.kmin, args.kmax, args.n)?);
    let c = scatter_coeffs(&barrier, grid)?;
    writeln!(out, "k,T,R,J,F,Jprime,Fprime")?;
    for i in 0..c.len() {
        let s = c.sample(i);
        writeln!(out, "{},{},{},{},{},{},{}", s.k, s.t, s.r, s.j, s.f, s.j_prime, s.f_prime)?;
    }
    Ok(EXIT_OK)
}

fn prepare(args: &ScenarioArgs) -> Result<(Units, Barrier, Scenario, crate::potential::ScatterCoeffs), Failure> {
    let units = args.units.unwrap_or_default();
    let barrier = load_barrier(&args.barrier, units, args.a)?;
    let grid = Arc::new(KGrid::centered(args.k0, args.l0, args.n)?);
    let scenario = Scenario::new(args.side, args.k0, args.l0, args.xr, grid.clone())?;
    let coeffs = scatter_coeffs(&barrier, grid)?;
    Ok((units, barrier, scenario, coeffs))
}

pub fn cmd_times(args: &TimesArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (units, _, scenario, coeffs) = prepare(&args.scenario)?;
    let report = time_report(&scenario, &coeffs, args.l1, args.l2, args.narrow)?.in_units(&units);
    write_json(out, &report)?;
    Ok(EXIT_OK)
}

pub fn cmd_validate(args: &ValidateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (units, barrier, scenario, coeffs) = prepare(&args.scenario)?;
    let mut config = OracleConfig::new(units.time_to_internal(args.t_final), units.time_to_internal(args.dt));
    config.dx_max = args.dx;
    config.domain = args.domain;
    let mut v = validate(&barrier, &scenario, &coeffs, &config)?;
    v.t_final = args.t_final;
    v.dt = args.dt;
    v.fit_window = (
        units.time_from_internal(v.fit_window.0),
        units.time_from_internal(v.fit_window.1),
    );
    write_json(out, &v)?;
    Ok(if v.passed { EXIT_OK } else { EXIT_VALIDATION })
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure {
        code: EXIT_VALIDATION,
        message: e.to_string(),
    })?;
    writeln!(out, "{text}")?;
    Ok(())
}
