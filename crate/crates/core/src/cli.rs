//! `bandex` command-line front end.
//!
//! Exit codes: 0 success, 1 solver failure, 2 configuration or parameter
//! error, 3 numerical divergence, 4 I/O or file-format error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{parse_config, to_json, Experiment, ExperimentConfig, ModeConfig};
use crate::engine::{
    least_squares_oracle, run_extrapolation, tikhonov_oracle, IterationReport, Mode, StopReason,
};
use crate::error::{Error, Result};
use crate::grid::Signal;
use crate::io::{
    export_pgm, io_context, parse_metrics_csv, read_signal, write_metrics_csv, write_signal,
};
use crate::operators::RegularizationParams;
use crate::spectral::{
    lipschitz_regularized, lipschitz_unregularized, predicted_contraction, region_spectra,
    tau_upper_bound, EigenOptions,
};
use crate::synthesis::nmse;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "bandex",
    version,
    about = "Bandlimited extrapolation from weighted region measurements"
)]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides `synthesis.seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Suppress progress and summaries on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    /// Overrides `output.directory`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the signal and its region measurements.
    Synth,
    /// Run the extrapolation and write the estimate and metrics.
    Run,
    /// Per-region eigenvalues and Lipschitz constants.
    Eigen,
    /// Direct least-squares and Tikhonov solves.
    Oracle,
    /// Summarize a metrics CSV.
    Report {
        metrics: PathBuf,
        /// NMSE levels in dB, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            allow_negative_numbers = true,
            default_value = "-10,-20,-30,-40"
        )]
        thresholds: Vec<f64>,
    },
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::Parameter(_)
        | Error::Validation { .. }
        | Error::Contract(_)
        | Error::DegenerateSpectrum(_)
        | Error::Synthesis(_)
        | Error::ExactlyBandlimited => EXIT_CONFIG,
        Error::Diverged(_) => EXIT_DIVERGED,
        Error::Io(_) | Error::Format { .. } => EXIT_IO,
        Error::Internal(_) | Error::NoConvergence { .. } | Error::UndefinedMetric(_) => {
            EXIT_FAILURE
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

struct Context {
    cfg: ExperimentConfig,
    out: PathBuf,
    quiet: bool,
}

impl Context {
    fn load(cli: &Cli) -> Result<Self> {
        let path = cli
            .config
            .as_ref()
            .ok_or_else(|| Error::param("--config is required for this command"))?;
        let text = fs::read_to_string(path).map_err(|e| io_context(e, path))?;
        let mut cfg = parse_config(&text)?;
        if let Some(seed) = cli.seed {
            cfg.synthesis.seed = seed;
        }
        let out = cli
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
        fs::create_dir_all(&out).map_err(|e| io_context(e, &out))?;
        Ok(Context {
            cfg,
            out,
            quiet: cli.quiet,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn pgm(&self, f: &Signal, name: &str) -> Result<()> {
        if self.cfg.output.pgm && f.shape().ndim() == 2 {
            export_pgm(f, self.path(name))?;
        }
        Ok(())
    }

    fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| io_context(e, &path))
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Report {
            metrics,
            thresholds,
        } => report(metrics, thresholds, cli.quiet),
        Command::Synth => synth(&Context::load(cli)?),
        Command::Run => run(&Context::load(cli)?),
        Command::Eigen => eigen(&Context::load(cli)?),
        Command::Oracle => oracle(&Context::load(cli)?),
    }
}

fn synth(ctx: &Context) -> Result<()> {
    let exp = Experiment::build(&ctx.cfg)?;
    write_signal(&exp.field, ctx.path("h.ndsig"))?;
    write_signal(&exp.clean, ctx.path("clean.ndsig"))?;
    write_signal(exp.measured.samples(), ctx.path("measured.ndsig"))?;
    ctx.write_text("config.json", &to_json(&ctx.cfg))?;
    ctx.pgm(&exp.field, "h.pgm")?;
    ctx.pgm(exp.measured.samples(), "measured.pgm")?;
    ctx.say(format!(
        "synthesized {} grid, {} in-band bins, {} regions -> {}",
        exp.shape,
        exp.support.count(),
        exp.measured.regions().len(),
        ctx.out.display()
    ));
    Ok(())
}

fn format_db(v: Option<f64>) -> String {
    match v {
        Some(v) if v == f64::NEG_INFINITY => "-inf dB".to_string(),
        Some(v) => format!("{v:.3} dB"),
        None => "n/a".to_string(),
    }
}

fn save_run(ctx: &Context, report: &IterationReport) -> Result<()> {
    write_signal(&report.final_signal, ctx.path("estimate.ndsig"))?;
    if !report.records.is_empty() {
        write_metrics_csv(report, ctx.path("metrics.csv"))?;
    }
    ctx.pgm(&report.final_signal, "estimate.pgm")
}

fn run(ctx: &Context) -> Result<()> {
    let exp = Experiment::build(&ctx.cfg)?;
    ctx.write_text("config.json", &to_json(&ctx.cfg))?;
    match run_extrapolation(&exp.measured, &exp.support, &exp.run, Some(&exp.field)) {
        Ok(report) => {
            save_run(ctx, &report)?;
            let reason = match report.stop_reason {
                StopReason::MaxIters => "iteration limit",
                StopReason::ResidualTol => "residual tolerance",
                StopReason::Diverged => "divergence",
            };
            ctx.say(format!(
                "stopped after {} iterations ({reason}); final NMSE {}",
                report.iterations,
                format_db(report.last().and_then(|r| r.nmse_db))
            ));
            Ok(())
        }
        Err(Error::Diverged(report)) => {
            save_run(ctx, &report)?;
            Err(Error::Diverged(report))
        }
        Err(e) => Err(e),
    }
}

fn csv_number(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.15e}")).unwrap_or_default()
}

fn eigen(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    let exp = Experiment::build(cfg)?;
    let regions = exp.measured.regions();
    let n = cfg.eigen.truncation;
    let spectra = region_spectra(
        regions.regions(),
        &exp.support,
        cfg.eigen.count(),
        cfg.eigen.tol,
        &EigenOptions::default(),
    )?;
    let params = match exp.run.mode {
        Mode::Regularized(p) => Some(p),
        Mode::Unregularized => None,
    };

    let mut table = String::from("region,index,eigenvalue,residual\n");
    for spec in &spectra {
        for (i, (lambda, res)) in spec.eigenvalues().iter().zip(spec.residuals()).enumerate() {
            let _ = writeln!(
                table,
                "{},{i},{lambda:.15e},{res:.15e}",
                spec.region_index()
            );
        }
    }
    ctx.write_text("spectra.csv", &table)?;

    let mu = params.map_or(0.0, |p| p.mu());
    let mut lip = String::from(
        "region,weight,lambda_0,lambda_n,lipschitz_unregularized,tau_bound,lipschitz_regularized\n",
    );
    let regularized =
        |s| params.and_then(|p: RegularizationParams| lipschitz_regularized(s, n, &p).ok());
    for (spec, &w) in spectra.iter().zip(regions.weights()) {
        let _ = writeln!(
            lip,
            "{},{w:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{}",
            spec.region_index(),
            spec.eigenvalue(0),
            spec.eigenvalue(n),
            lipschitz_unregularized(spec, n)?,
            tau_upper_bound(spec, n, mu)?,
            csv_number(regularized(spec)),
        );
    }
    let combined_plain = predicted_contraction(&spectra, regions.weights(), n, None)?;
    let combined_reg =
        params.and_then(|p| predicted_contraction(&spectra, regions.weights(), n, Some(&p)).ok());
    let _ = writeln!(
        lip,
        "weighted,1,,,{combined_plain:.15e},,{}",
        csv_number(combined_reg)
    );
    ctx.write_text("lipschitz.csv", &lip)?;
    ctx.say(format!(
        "{} regions, N = {n}: weighted contraction {combined_plain:.6}{}",
        spectra.len(),
        combined_reg
            .map(|c| format!(" (regularized {c:.6})"))
            .unwrap_or_default()
    ));
    Ok(())
}

#[derive(Serialize)]
struct OracleEntry {
    condition_number: Option<f64>,
    ill_posed: bool,
    nmse_db_vs_field: Option<f64>,
    nmse_db_vs_clean: Option<f64>,
    relative_distance_to_estimate: Option<f64>,
}

#[derive(Serialize)]
struct OracleReport {
    grid: Vec<usize>,
    subspace_dim: usize,
    least_squares: OracleEntry,
    #[serde(skip_serializing_if = "Option::is_none")]
    tikhonov: Option<OracleEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn oracle(ctx: &Context) -> Result<()> {
    let exp = Experiment::build(&ctx.cfg)?;
    let estimate_path = ctx.path("estimate.ndsig");
    let estimate = if estimate_path.exists() {
        Some(read_signal(&estimate_path)?).filter(|e| e.shape() == &exp.shape)
    } else {
        None
    };
    let entry = |sol: &crate::engine::OracleSolution| OracleEntry {
        condition_number: finite(sol.condition_number),
        ill_posed: sol.ill_posed,
        nmse_db_vs_field: nmse(&exp.field, &sol.signal).ok().and_then(finite),
        nmse_db_vs_clean: nmse(&exp.clean, &sol.signal).ok().and_then(finite),
        relative_distance_to_estimate: estimate
            .as_ref()
            .map(|e| sol.signal.distance(e) / sol.signal.norm().max(f64::MIN_POSITIVE)),
    };

    let ls = least_squares_oracle(&exp.measured, &exp.support)?;
    write_signal(&ls.signal, ctx.path("oracle_least_squares.ndsig"))?;
    let mut report = OracleReport {
        grid: exp.shape.dims().to_vec(),
        subspace_dim: exp.support.count(),
        least_squares: entry(&ls),
        tikhonov: None,
        mu: None,
    };
    if let ModeConfig::Regularized { mu, .. } = ctx.cfg.mode {
        let tk = tikhonov_oracle(&exp.measured, &exp.support, mu)?;
        write_signal(&tk.signal, ctx.path("oracle_tikhonov.ndsig"))?;
        report.tikhonov = Some(entry(&tk));
        report.mu = Some(mu);
    }
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Internal(e.to_string()))?;
    ctx.write_text("oracle_report.json", &(json + "\n"))?;
    ctx.say(format!(
        "least squares: condition {:.3e}{}",
        ls.condition_number,
        if ls.ill_posed { " (ill-posed)" } else { "" }
    ));
    Ok(())
}

fn report(path: &Path, thresholds: &[f64], quiet: bool) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| io_context(e, path))?;
    let records = parse_metrics_csv(&text)?;
    let last = records
        .last()
        .ok_or_else(|| Error::format(text.len() as u64, "metrics file has no rows"))?;
    let mut out = String::new();
    let _ = writeln!(out, "records: {}", records.len());
    let _ = writeln!(out, "final iteration: {}", last.iteration);
    let _ = writeln!(out, "final NMSE: {}", format_db(last.nmse_db));
    let _ = writeln!(out, "final residual: {:.6e}", last.residual);
    let best = records
        .iter()
        .filter_map(|r| r.nmse_db)
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.min(v)))
        });
    let _ = writeln!(out, "best NMSE: {}", format_db(best));
    for &t in thresholds {
        let hit = records
            .iter()
            .find(|r| r.nmse_db.is_some_and(|v| v <= t))
            .map(|r| r.iteration.to_string())
            .unwrap_or_else(|| "not reached".to_string());
        let _ = writeln!(out, "iterations to {t} dB: {hit}");
    }
    if !quiet {
        print!("{out}");
    }
    Ok(())
}
