//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error,
//! 3 runtime error.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::dynamics::integrate;
use crate::error::Error;
use crate::oracle::{run_manifest, Manifest};
use crate::pulses::PulseFamily;
use crate::sweep::run_sweep;
use crate::tomography::{concurrence, entanglement_series, reconstruct};

pub use config::RunConfig;
pub use output::{Field, Format, Table};

pub const SCHEMA_SIMULATE: &str = "entsim.simulate/1";
pub const SCHEMA_SWEEP: &str = "entsim.sweep/1";
pub const SCHEMA_COUPLINGS: &str = "entsim.couplings/1";
pub const SCHEMA_VALIDATE: &str = "entsim.validate/1";

pub const SIMULATE_COLUMNS: [&str; 15] = [
    "t",
    "m1",
    "m2",
    "xx",
    "xy",
    "zz",
    "rho11",
    "rho22",
    "rho33",
    "rho44",
    "re_rho23",
    "im_rho23",
    "concurrence",
    "eof",
    "drive",
];

#[derive(Debug, Parser)]
#[command(name = "entsim", version, about = "Two-atom entanglement from a single-photon pulse")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one configuration and write the time series.
    Simulate(CommonArgs),
    /// Peak entanglement over a bandwidth × separation grid.
    Sweep(CommonArgs),
    /// Collective rates as functions of the separation.
    Couplings(CommonArgs),
    /// Re-derive every golden value in the manifest.
    Validate(ValidateArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub r12: Option<f64>,
    #[arg(long, value_parser = ["rising", "gaussian", "tabulated"])]
    pub pulse: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct ValidateArgs {
    /// Manifest file; the bundled manifest when absent.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(Error),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn config_err(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

impl CommonArgs {
    /// Config file (or defaults) with the flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p).map_err(config_err)?,
            None => RunConfig::default(),
        };
        if let Some(f) = self.format {
            c.output.format = f;
        }
        if let Some(p) = &self.out {
            c.output.path = Some(p.clone());
        }
        if let Some(v) = self.omega {
            c.pulse.omega = v;
        }
        if let Some(v) = self.r12 {
            c.atoms.r12 = v;
        }
        if let Some(p) = &self.pulse {
            c.pulse.family = p.clone();
        }
        if let Some(w) = self.workers {
            c.sweep.workers = Some(w);
        }
        c.validate().map_err(config_err)?;
        Ok(c)
    }
}

/// Writes to the configured path, or to `stdout`.
fn emit(table: &Table, format: Format, path: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)
                .map_err(|e| CliError::Runtime(Error::InvalidInput(format!("cannot create {}: {e}", p.display()))))?;
            table.write(format, &mut f).map_err(CliError::Runtime)
        }
        None => table.write(format, stdout).map_err(CliError::Runtime),
    }
}

pub fn simulate_table(cfg: &RunConfig, notes: &mut Vec<String>) -> Result<Table, CliError> {
    let (params, note) = cfg.system().map_err(config_err)?;
    notes.extend(note);
    let opts = cfg.integrate_options().map_err(config_err)?;
    let traj = integrate(&params, &opts).map_err(CliError::Runtime)?;
    let series = entanglement_series(&traj).map_err(CliError::Runtime)?;
    let mut table = Table::new(SCHEMA_SIMULATE, SIMULATE_COLUMNS.to_vec());
    for (i, s) in traj.states.iter().enumerate() {
        let rho = reconstruct(s).map_err(CliError::Runtime)?;
        let c = concurrence(&rho).map_err(CliError::Runtime)?;
        let [p11, p22, p33, p44] = rho.populations();
        let r23 = rho.rho(2, 3);
        table.push(
            [
                traj.times[i],
                s.m1,
                s.m2,
                s.xx,
                s.xy,
                s.zz,
                p11,
                p22,
                p33,
                p44,
                r23.re,
                r23.im,
                c,
                series.points[i].eof,
                traj.drives[i][0],
            ]
            .into_iter()
            .map(Field::from)
            .collect(),
        );
    }
    notes.push(format!(
        "peak eof {} at t = {} (concurrence {})",
        output::format_number(series.peak.eof),
        output::format_number(series.peak.time),
        output::format_number(series.peak.concurrence)
    ));
    Ok(table)
}

pub fn sweep_table(cfg: &RunConfig, notes: &mut Vec<String>) -> Result<Table, CliError> {
    let plan = cfg.sweep_plan().map_err(config_err)?;
    let result = run_sweep(&plan, cfg.sweep.workers).map_err(CliError::Runtime)?;
    let mut table = Table::new(SCHEMA_SWEEP, vec!["family", "r12", "omega", "peak_eof", "peak_time", "status"]);
    for r in result.records() {
        table.push(vec![
            r.family.into(),
            r.r12.into(),
            r.omega.into(),
            r.peak_eof.into(),
            r.peak_time.into(),
            r.status.into(),
        ]);
    }
    for (r12, opt) in result.r12s.iter().zip(result.optima()) {
        notes.push(match opt {
            Some(o) => format!(
                "r12 = {r12}: best omega {} (peak eof {}){}",
                o.omega,
                output::format_number(o.peak_eof),
                if o.interior { "" } else { " on grid boundary" }
            ),
            None => format!("r12 = {r12}: every cell failed"),
        });
    }
    if result.poisoned() > 0 {
        notes.push(format!("{} poisoned cell(s)", result.poisoned()));
    }
    Ok(table)
}

pub fn couplings_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let model = cfg.coupling_model();
    let (g1, g2) = (cfg.atoms.gamma1, cfg.atoms.gamma2);
    let alpha = cfg.atoms.alpha;
    let mut table = Table::new(SCHEMA_COUPLINGS, vec!["r12", "gamma12", "lambda12"]);
    for r in cfg.scan_grid().map_err(config_err)? {
        let d = std::f64::consts::TAU * r;
        let g = model.gamma_cross(g1, g2, d, alpha).map_err(CliError::Runtime)?;
        let l = model.lambda_cross(g1, g2, d, alpha).map_err(CliError::Runtime)?;
        table.push(vec![r.into(), g.into(), l.into()]);
    }
    Ok(table)
}

/// Runs the manifest; the table lists every entry, failures included.
pub fn validate_table(manifest: &Manifest) -> (Table, usize) {
    let outcomes = run_manifest(manifest);
    let mut table =
        Table::new(SCHEMA_VALIDATE, vec!["id", "status", "expected", "tolerance", "max_deviation", "detail"]);
    let mut failed = 0;
    for o in &outcomes {
        failed += usize::from(!o.passed);
        let dev = o.computed.iter().map(|(_, v)| (v - o.expected).abs()).fold(f64::NAN, f64::max);
        let detail = match &o.message {
            Some(m) => m.clone(),
            None => o
                .computed
                .iter()
                .map(|(k, v)| format!("{k}={}", output::format_number(*v)))
                .collect::<Vec<_>>()
                .join(" "),
        };
        table.push(vec![
            o.id.as_str().into(),
            if o.passed { "pass" } else { "FAIL" }.into(),
            o.expected.into(),
            o.tolerance.into(),
            dev.into(),
            detail.into(),
        ]);
    }
    (table, failed)
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let mut notes = Vec::new();
    let result = match cmd {
        Command::Simulate(a) => {
            let cfg = a.resolve()?;
            let t = simulate_table(&cfg, &mut notes)?;
            emit(&t, cfg.output.format, cfg.output.path.as_ref(), stdout)
        }
        Command::Sweep(a) => {
            let cfg = a.resolve()?;
            if cfg.family().map_err(config_err)? == PulseFamily::Tabulated {
                return Err(CliError::Config("sweeps support the rising and gaussian families only".into()));
            }
            let t = sweep_table(&cfg, &mut notes)?;
            emit(&t, cfg.output.format, cfg.output.path.as_ref(), stdout)
        }
        Command::Couplings(a) => {
            let cfg = a.resolve()?;
            let t = couplings_table(&cfg)?;
            emit(&t, cfg.output.format, cfg.output.path.as_ref(), stdout)
        }
        Command::Validate(a) => {
            let manifest = match &a.manifest {
                Some(p) => Manifest::load(p).map_err(config_err)?,
                None => Manifest::builtin(),
            };
            let (t, failed) = validate_table(&manifest);
            emit(&t, a.format.unwrap_or_default(), a.out.as_ref(), stdout)?;
            notes.push(format!("{} of {} entries passed", t.rows.len() - failed, t.rows.len()));
            if failed > 0 {
                for n in &notes {
                    let _ = writeln!(stderr, "{n}");
                }
                return Err(CliError::Validation(format!("{failed} manifest entries failed")));
            }
            Ok(())
        }
    };
    for n in &notes {
        let _ = writeln!(stderr, "{n}");
    }
    result
}

/// Parses `args` and runs the subcommand, returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                return 2;
            }
            let _ = write!(stdout, "{text}");
            return 0;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("entsim").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn flags_override_config() {
        let a = CommonArgs { omega: Some(3.0), pulse: Some("gaussian".into()), ..Default::default() };
        let c = a.resolve().unwrap();
        assert_eq!(c.pulse.omega, 3.0);
        assert_eq!(c.family().unwrap(), PulseFamily::Gaussian);
    }

    #[test]
    fn bad_flag_value_is_config_error() {
        let (code, _, _) = run_capture(&["simulate", "--omega", "-2"]);
        assert_eq!(code, 2);
        let (code, _, _) = run_capture(&["simulate", "--pulse", "square"]);
        assert_eq!(code, 2);
        let (code, _, _) = run_capture(&["simulate", "--config", "/nonexistent.toml"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("simulate"));
    }

    #[test]
    fn couplings_header() {
        let (code, out, _) = run_capture(&["couplings"]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("# schema: entsim.couplings/1"));
        assert_eq!(lines.next(), Some("r12,gamma12,lambda12"));
        assert_eq!(lines.count(), 500);
    }

    #[test]
    fn exit_codes() {
        // a separation below the cutoff is rejected while building the system
        let (code, _, err) = run_capture(&["simulate", "--r12", "1e-6"]);
        assert_eq!(code, 2, "{err}");
        assert!(err.contains("delta_min"), "{err}");
        assert_eq!(CliError::Runtime(Error::Domain("x".into())).exit_code(), 3);
        assert_eq!(CliError::Validation("x".into()).exit_code(), 1);
    }
}
