//! Command-line driver.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 model or solver
//! error, 4 I/O error, 5 analysis error. Failures print the error name and
//! message to stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::{parse_config, Config, ConfigError, Value};
use crate::dressed::{bright_states, compare_splitting, dark_states, eigensystem, DressedError, DressedState};
use crate::geometry::{preset_names, Scenario};
use crate::model::{
    max_step, time_evolve_sampled, DensityMatrix, ModelError, SystemParams,
};
use crate::output::{
    heatmap_svg, line_plot_svg, map_to_string, spectrum_to_string, table_to_string, write_svg,
    OutputError,
};
use crate::spectra::{
    coherence_traces_with, decomposition_compare_with, detuning_map_with, probe_sweep_with,
    switching_contrast_with, Column, SpectraError, SweepOptions, RE_RHO12_PLUS_RE_RHO13,
};

/// Environment variable capping sweep parallelism (0 = automatic).
pub const THREADS_ENV: &str = "TRIPOD_SIM_THREADS";

/// Steady states with a larger generator residual are rejected.
pub const RESIDUAL_LIMIT: f64 = 1e-8;

/// Target number of rows in an `evolve` trajectory file.
const EVOLVE_ROWS: usize = 2000;

#[derive(Debug, Parser)]
#[command(name = "tripod-sim", version, about = "Driven four-level tripod simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Named scenario to start from (see list-presets).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; CSV commands write to stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot here.
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    /// Override one config key, e.g. --set rabi.omega_p_khz=0.5.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Probe absorption and coherences over the probe detuning axis.
    Spectrum,
    /// Absorption over probe detuning and symmetric coupling/control detuning.
    #[command(name = "map2d")]
    Map2D,
    /// Two-photon coherences of the tripod and of its Λ reference.
    Traces,
    /// Tripod spectrum against the two detuned Λ spectra and their mean.
    Decompose,
    /// Dressed states, eigenvalues and the splitting comparison table.
    Dressed,
    /// RK4 time evolution from a single populated level.
    Evolve,
    /// Switching contrast of the tripod against its Λ reference.
    Contrast,
    /// Print the preset names.
    ListPresets,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("steady-state residual {residual:e} exceeds {limit:e}")]
    ResidualTooLarge { residual: f64, limit: f64 },
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Spectra(SpectraError),
    #[error(transparent)]
    Dressed(#[from] DressedError),
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Model(m) => CliError::Model(m),
            other => CliError::Spectra(other),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(source: io::Error) -> Self {
        CliError::Output(OutputError::IoError { path: PathBuf::from("<stdout>"), source })
    }
}

fn model_error_name(e: &ModelError) -> &'static str {
    match e {
        ModelError::InvalidParams(_) => "InvalidParams",
        ModelError::InvalidState(_) => "InvalidState",
        ModelError::SingularSystem { .. } => "SingularSystem",
        ModelError::StepTooLarge { .. } => "StepTooLarge",
        ModelError::InvalidTime(_) => "InvalidTime",
    }
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Model(_) | CliError::ResidualTooLarge { .. } => 3,
            CliError::Spectra(SpectraError::Sweep { .. }) => 3,
            CliError::Output(_) => 4,
            CliError::Spectra(_) | CliError::Dressed(_) => 5,
        }
    }

    /// Short name of the underlying error variant.
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "UsageError",
            CliError::Config(e) => match e {
                ConfigError::ParseError { .. } => "ParseError",
                ConfigError::UnknownKey { .. } => "UnknownKey",
                ConfigError::DuplicateKey { .. } => "DuplicateKey",
                ConfigError::InvalidValue { .. } => "InvalidValue",
                ConfigError::Geometry(g) => match g {
                    crate::geometry::GeometryError::UnknownPreset(_) => "UnknownPreset",
                    crate::geometry::GeometryError::InvalidLayout(_) => "InvalidLayout",
                    crate::geometry::GeometryError::InvalidCalibration(_) => "InvalidCalibration",
                },
            },
            CliError::Model(e) => model_error_name(e),
            CliError::ResidualTooLarge { .. } => "ResidualTooLarge",
            CliError::Output(OutputError::IoError { .. }) => "IoError",
            CliError::Output(OutputError::Format { .. }) => "FormatError",
            CliError::Spectra(e) => match e {
                SpectraError::Sweep { source, .. } => model_error_name(source),
                SpectraError::InvalidAxis(_) => "InvalidAxis",
                SpectraError::Model(m) => model_error_name(m),
                SpectraError::Precondition(_) => "PreconditionViolated",
                SpectraError::TooShort(_) => "TooShort",
                SpectraError::NoFeatures => "NoFeatures",
                SpectraError::ThreadPool(_) => "ThreadPool",
            },
            CliError::Dressed(DressedError::DegenerateFields(_)) => "DegenerateFields",
        }
    }
}

/// Summary of a completed command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    pub wall_time: Duration,
    pub outputs: Vec<PathBuf>,
    /// Largest steady-state residual over all solves (0 if none ran).
    pub residual_max: f64,
    pub warnings: Vec<String>,
}

/// Settings not carried by the scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub sweep: SweepOptions,
}

/// Builds the merged configuration: file, then `--preset`, then `--set`.
pub fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| {
                CliError::Output(OutputError::IoError { path: path.clone(), source })
            })?;
            parse_config(&text)?
        }
        None => Config::default(),
    };
    if let Some(name) = &cli.preset {
        config.set("preset", Value::Ident(name.clone()))?;
    }
    for s in &cli.set {
        config.set_assignment(s)?;
    }
    Ok(config)
}

struct Run<'a> {
    scenario: Scenario,
    opts: &'a RunOptions,
    stdout: &'a mut dyn Write,
    report: RunReport,
}

impl Run<'_> {
    fn residual(&mut self, r: f64) -> Result<(), CliError> {
        self.report.residual_max = self.report.residual_max.max(r);
        if r.is_nan() || r >= RESIDUAL_LIMIT {
            return Err(CliError::ResidualTooLarge { residual: r, limit: RESIDUAL_LIMIT });
        }
        Ok(())
    }

    /// Writes to `--out` if given, otherwise to stdout.
    fn emit(&mut self, text: &str) -> Result<(), CliError> {
        match &self.opts.out {
            Some(path) => {
                fs::write(path, text).map_err(|source| OutputError::IoError { path: path.clone(), source })?;
                self.report.outputs.push(path.clone());
            }
            None => {
                self.stdout.write_all(text.as_bytes())?;
                if !text.ends_with('\n') {
                    self.stdout.write_all(b"\n")?;
                }
            }
        }
        Ok(())
    }

    fn emit_svg(&mut self, make: impl FnOnce() -> String) -> Result<(), CliError> {
        if let Some(path) = self.opts.svg.clone() {
            write_svg(&path, &make())?;
            self.report.outputs.push(path);
        }
        Ok(())
    }

    fn warn_isolated(&mut self, p: &SystemParams, what: &str) {
        let isolated = p.isolated_levels();
        if !isolated.is_empty() {
            let levels: Vec<String> = isolated.iter().map(|l| format!("|{}>", l + 1)).collect();
            self.report.warnings.push(format!(
                "{what}: level(s) {} decoupled; excluded from the steady state",
                levels.join(", ")
            ));
        }
    }
}

pub fn run(
    command: Command,
    config: &Config,
    opts: &RunOptions,
    stdout: &mut dyn Write,
) -> Result<RunReport, CliError> {
    let start = Instant::now();
    if command == Command::ListPresets {
        let mut text = preset_names().join("\n");
        text.push('\n');
        stdout.write_all(text.as_bytes())?;
        return Ok(RunReport {
            scenario: "-".into(),
            wall_time: start.elapsed(),
            outputs: Vec::new(),
            residual_max: 0.0,
            warnings: Vec::new(),
        });
    }
    let scenario = config.resolve()?;
    let report = RunReport {
        scenario: scenario.name.clone(),
        wall_time: Duration::ZERO,
        outputs: Vec::new(),
        residual_max: 0.0,
        warnings: Vec::new(),
    };
    let mut r = Run { scenario, opts, stdout, report };
    match command {
        Command::Spectrum => spectrum(&mut r)?,
        Command::Map2D => map2d(&mut r)?,
        Command::Traces => traces(&mut r)?,
        Command::Decompose => decompose(&mut r)?,
        Command::Dressed => dressed(&mut r)?,
        Command::Evolve => evolve(&mut r)?,
        Command::Contrast => contrast(&mut r)?,
        Command::ListPresets => unreachable!(),
    }
    r.report.wall_time = start.elapsed();
    Ok(r.report)
}

fn spectrum(r: &mut Run) -> Result<(), CliError> {
    let p = r.scenario.params;
    r.warn_isolated(&p, "spectrum");
    let series = probe_sweep_with(&p, &r.scenario.dp_axis.values(), &r.opts.sweep)?;
    r.residual(series.max_residual())?;
    r.emit(&spectrum_to_string(&series))?;
    let title = format!("{}: probe absorption", r.scenario.name);
    r.emit_svg(|| line_plot_svg(&title, series.axis(), &[("im_rho24", series.absorption())]))
}

fn map2d(r: &mut Run) -> Result<(), CliError> {
    let p = r.scenario.params;
    r.warn_isolated(&p, "map2d");
    let d_axis = r.scenario.d_axis.expect("resolved scenarios carry a d axis");
    let map = detuning_map_with(&p, &r.scenario.dp_axis.values(), &d_axis.values(), &r.opts.sweep)?;
    r.residual(map.max_residual)?;
    r.emit(&map_to_string(&map))?;
    let title = format!("{}: absorption over (delta_p, delta)", r.scenario.name);
    r.emit_svg(|| heatmap_svg(&title, &map))
}

fn traces(r: &mut Run) -> Result<(), CliError> {
    let p = r.scenario.params;
    let lambda = p.lambda_reference();
    r.warn_isolated(&lambda, "Λ reference");
    let axis = r.scenario.dp_axis.values();
    let tripod = coherence_traces_with(&p, &axis, &r.opts.sweep)?;
    let reference = probe_sweep_with(&lambda, &axis, &r.opts.sweep)?;
    r.residual(tripod.max_residual().max(reference.max_residual()))?;
    let sum = tripod.extra(RE_RHO12_PLUS_RE_RHO13).expect("traces carry the sum column");
    let headers = [
        "delta_p_khz",
        "lambda_im_rho24",
        "lambda_re_rho12",
        "im_rho24",
        RE_RHO12_PLUS_RE_RHO13,
        "re_rho23",
    ];
    let columns: [&[f64]; 6] = [
        tripod.axis(),
        reference.absorption(),
        reference.column(Column::ReRho12),
        tripod.absorption(),
        sum,
        tripod.column(Column::ReRho23),
    ];
    r.emit(&table_to_string(&headers, &columns))?;
    let title = format!("{}: coherences", r.scenario.name);
    r.emit_svg(|| {
        line_plot_svg(
            &title,
            &axis,
            &[
                ("Λ im_rho24", reference.absorption()),
                ("Λ re_rho12", reference.column(Column::ReRho12)),
                ("re_rho12+re_rho13", sum),
                ("re_rho23", tripod.column(Column::ReRho23)),
            ],
        )
    })
}

fn decompose(r: &mut Run) -> Result<(), CliError> {
    let p = r.scenario.params;
    let d = decomposition_compare_with(&p, &r.scenario.dp_axis.values(), &r.opts.sweep)?;
    for s in [&d.tripod, &d.lambda_coupling, &d.lambda_control] {
        r.residual(s.max_residual())?;
    }
    let headers = ["delta_p_khz", "tripod", "lambda_coupling", "lambda_control", "average"];
    let columns: [&[f64]; 5] = [
        d.tripod.axis(),
        d.tripod.absorption(),
        d.lambda_coupling.absorption(),
        d.lambda_control.absorption(),
        d.average.absorption(),
    ];
    r.emit(&table_to_string(&headers, &columns))?;
    let title = format!("{}: decomposition", r.scenario.name);
    r.emit_svg(|| line_plot_svg(&title, d.tripod.axis(), &headers[1..].iter().copied().zip(columns[1..].iter().copied()).collect::<Vec<_>>()))
}

fn format_state(s: &DressedState) -> String {
    let amps: Vec<String> = s
        .amplitudes
        .iter()
        .map(|a| if a.im == 0.0 { format!("{:+.6}", a.re) } else { format!("{:+.6}{:+.6}i", a.re, a.im) })
        .collect();
    let ev = s.eigenvalue.map_or(String::new(), |e| format!("  E = {e:+.6} kHz"));
    format!("|{}> = ({}){ev}", s.label, amps.join(", "))
}

fn dressed(r: &mut Run) -> Result<(), CliError> {
    let p = r.scenario.params;
    let mut out = String::new();
    let omega = p.generalized_rabi();
    let _ = writeln!(out, "scenario: {}", r.scenario.name);
    let _ = writeln!(
        out,
        "Omega_c = {} kHz, Omega_p = {} kHz, Omega_A = {} kHz",
        p.omega_c, p.omega_p, p.omega_a
    );
    let _ = writeln!(out, "generalized Rabi frequency Omega = {omega:.6} kHz");
    let eig = eigensystem(&p);
    let _ = writeln!(
        out,
        "eigenvalues of H (delta_c = {}, delta_p = {}, delta_A = {}): {}",
        p.delta_c + 0.0,
        p.delta_p + 0.0,
        p.delta_a + 0.0,
        eig.eigenvalues.iter().map(|e| format!("{e:+.6}")).collect::<Vec<_>>().join(", ")
    );
    let _ = writeln!(out, "eigen residual max: {:.3e}", eig.max_residual());
    let _ = writeln!(out, "dressed states at zero detuning (basis |1>, |2>, |3>, |4>):");
    match dark_states(p.omega_c, p.omega_p, p.omega_a) {
        Ok((d1, d2)) => {
            let _ = writeln!(out, "  {}", format_state(&d1));
            let _ = writeln!(out, "  {}", format_state(&d2));
        }
        Err(e) => r.report.warnings.push(e.to_string()),
    }
    let (bp, bm) = bright_states(p.omega_c, p.omega_p, p.omega_a)?;
    let _ = writeln!(out, "  {}", format_state(&bp));
    let _ = writeln!(out, "  {}", format_state(&bm));

    let symmetric = (p.delta_c + p.delta_a).abs() <= 1e-9 * p.delta_c.abs().max(1.0);
    let mut deltas: Vec<f64> = [0.0, 0.1, 0.2, 0.3, 0.5].iter().map(|f| f * p.omega_c).collect();
    if symmetric && !deltas.contains(&p.delta_c) {
        deltas.push(p.delta_c);
        deltas.sort_by(f64::total_cmp);
    }
    let _ = writeln!(out, "bright-mode splitting, delta_c = -delta_A = delta, delta_p = 0:");
    let _ = writeln!(
        out,
        "  {:>10} {:>14} {:>14} {:>14} {:>14} {:>10}",
        "delta", "asym e+", "asym e-", "exact max", "exact min", "asym/exact"
    );
    for delta in deltas {
        let c = compare_splitting(&p, delta)?;
        let _ = writeln!(
            out,
            "  {:>10.4} {:>14.6} {:>14.6} {:>14.6} {:>14.6} {:>10.6}",
            c.delta, c.asymptotic_plus, c.asymptotic_minus, c.exact_highest, c.exact_lowest, c.ratio()
        );
    }
    r.emit(&out)
}

fn evolve(r: &mut Run) -> Result<(), CliError> {
    let p = r.scenario.params;
    let e = r.scenario.evolve;
    let dt = e.dt_ms.unwrap_or_else(|| 0.5 * max_step(&p).min(e.t_end_ms));
    let steps = (e.t_end_ms / dt).ceil() as usize;
    let stride = steps.div_ceil(EVOLVE_ROWS).max(1);
    let rho0 = DensityMatrix::pure_level(e.initial_level - 1);
    let traj = time_evolve_sampled(&p, &rho0, e.t_end_ms, dt, stride)?;
    let mut columns: Vec<Vec<f64>> = (0..9).map(|_| Vec::with_capacity(traj.len())).collect();
    for (t, rho) in traj.samples() {
        let pops = rho.populations();
        let row = [
            *t,
            pops[0],
            pops[1],
            pops[2],
            pops[3],
            rho.get(3, 1).im,
            rho.get(0, 1).re,
            rho.get(0, 2).re,
            rho.get(1, 2).re,
        ];
        for (c, v) in columns.iter_mut().zip(row) {
            c.push(v);
        }
    }
    if let Some((_, last)) = traj.last() {
        if last.min_eigenvalue() < -1e-7 {
            r.report.warnings.push(format!("final state has eigenvalue {:.3e}", last.min_eigenvalue()));
        }
    }
    let headers = ["t_ms", "rho11", "rho22", "rho33", "rho44", "im_rho24", "re_rho12", "re_rho13", "re_rho23"];
    let refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    r.emit(&table_to_string(&headers, &refs))?;
    let title = format!("{}: populations", r.scenario.name);
    r.emit_svg(|| {
        line_plot_svg(
            &title,
            &columns[0],
            &[("rho11", &columns[1]), ("rho22", &columns[2]), ("rho33", &columns[3]), ("rho44", &columns[4])],
        )
    })
}

fn contrast(r: &mut Run) -> Result<(), CliError> {
    let p = r.scenario.params;
    r.warn_isolated(&p.lambda_reference(), "Λ reference");
    let c = switching_contrast_with(&p, &r.opts.sweep)?;
    if c.guarded {
        r.report.warnings.push("Λ absorption at line center is below 1e-15; contrast reported as inf".into());
    }
    let text = format!(
        "scenario: {}\ncentral feature at delta_p = {:.6} kHz\ntripod absorption: {:.9e}\nΛ absorption at line center: {:.9e}\nswitching contrast: {:.6}\n",
        r.scenario.name, c.position, c.on, c.off, c.ratio
    );
    r.emit(&text)
}

fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got '{v}'"))),
        _ => Ok(0),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<RunReport, CliError> {
    let config = if cli.command == Command::ListPresets { Config::default() } else { load_config(cli)? };
    let opts = RunOptions {
        out: cli.out.clone(),
        svg: cli.svg.clone(),
        sweep: SweepOptions { threads: threads_from_env()?, ..SweepOptions::default() },
    };
    run(cli.command, &config, &opts, stdout)
}

fn write_report(report: &RunReport, stderr: &mut dyn Write) {
    for w in &report.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let outputs: Vec<String> = report.outputs.iter().map(|p| p.display().to_string()).collect();
    let _ = writeln!(
        stderr,
        "{}: done in {:.3} s, residual max {:.2e}{}",
        report.scenario,
        report.wall_time.as_secs_f64(),
        report.residual_max,
        if outputs.is_empty() { String::new() } else { format!(", wrote {}", outputs.join(", ")) }
    );
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(report) => {
            if cli.command != Command::ListPresets {
                write_report(&report, stderr);
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {e}", e.name());
            e.exit_code()
        }
    }
}
