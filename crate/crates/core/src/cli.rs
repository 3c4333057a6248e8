//! Command-line front end. Every command writes deterministic output: CSV
//! carries its metadata in leading `#` lines, JSON in a `meta` object.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::fock::{
    coherent_state_with_tolerance, displaced_number_tail, poisson_tail, read_state_file,
    MultiModeState, Parity, ParitySetting, Truncation,
};
use crate::fur::{check_fur, fig1_scan, ValidityRegion, DEFAULT_PHOTON_FLOOR};
use crate::scan::{stepped_grid, ScanResult, SCAN_SCHEMA_VERSION, TOOL_NAME, TOOL_VERSION};
use crate::security::{
    delta_from_violation, discrete_baseline, draw_monogamy_samples, evaluate_monogamy_samples,
    key_rate_lower_bound, MonogamySamplerConfig,
};
use crate::steering::{
    noon_dim, noon_state, steering_functional_with_tolerance, violation_search, SteeringSettings,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_EMPTY_SCAN: i32 = 4;
pub const EXIT_DEGENERATE: i32 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "cvsteer",
    version,
    about = "Displaced-parity uncertainty, steering and key-rate numerics"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalArgs {
    /// Truncation per mode: `auto` or an integer of at least 2
    #[arg(long, global = true, default_value = "auto")]
    pub dim: Truncation,
    /// Largest tolerated probability mass lost to truncation
    #[arg(long = "tail-tol", global = true, default_value_t = 1e-10)]
    pub tail_tol: f64,
    /// Slack on the [1/4, 3/4] bounds before a value counts as a violation
    #[arg(long = "bound-tol", global = true, default_value_t = 1e-4)]
    pub bound_tol: f64,
    /// Smallest |beta| inside the validity region
    #[arg(long = "beta-min", global = true, default_value_t = 0.05)]
    pub beta_min: f64,
    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Output file; standard output when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    fn other(self) -> Self {
        match self {
            Format::Csv => Format::Json,
            Format::Json => Format::Csv,
        }
    }
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Extremal average certainty over beta for each gamma (closed form)
    Fig1(Fig1Args),
    /// Steering functional of a N00N state over an (alpha, beta) grid
    NoonScan(NoonScanArgs),
    /// Steering functional of a two-mode state file at one setting pair
    SteerCheck(SteerCheckArgs),
    /// Monogamy relation on random tripartite separable mixtures
    Monogamy(MonogamyArgs),
    /// Key-rate lower bound from a violation amount or functional value
    KeyRate(KeyRateArgs),
    /// Two-level reference constants
    Baseline,
    /// Average certainty over a grid, without asserting the bounds
    FurScan(FurScanArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Fig1Args {
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    pub gamma_start: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub gamma_stop: f64,
    #[arg(long, default_value_t = 0.1)]
    pub gamma_step: f64,
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    pub beta_start: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub beta_stop: f64,
    #[arg(long, default_value_t = 0.1)]
    pub beta_step: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct NoonScanArgs {
    /// Photon number N
    #[arg(long = "n", default_value_t = 2)]
    pub n: usize,
    /// Bob's outcome: even|odd|0|1
    #[arg(long, default_value = "even")]
    pub b: Parity,
    /// Alice's outcome: even|odd|0|1
    #[arg(long, default_value = "odd")]
    pub a: Parity,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub alpha_start: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub alpha_stop: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha_step: f64,
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub beta_start: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta_stop: f64,
    #[arg(long, default_value_t = 0.01)]
    pub beta_step: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SteerCheckArgs {
    /// Two-mode state file (JSON)
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, default_value = "odd")]
    pub a: Parity,
    #[arg(long, default_value = "even")]
    pub b: Parity,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    /// Second Alice displacement; defaults to -alpha
    #[arg(long, allow_negative_numbers = true)]
    pub alpha2: Option<f64>,
    /// Second Bob displacement; defaults to -beta
    #[arg(long, allow_negative_numbers = true)]
    pub beta2: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MonogamyArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 4)]
    pub max_terms: usize,
    #[arg(long, default_value_t = 1.0)]
    pub gamma_min: f64,
    #[arg(long, default_value_t = 2.5)]
    pub gamma_max: f64,
    #[arg(long, default_value_t = 2.0)]
    pub displacement_max: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
#[group(required = true, multiple = false)]
pub struct KeyRateArgs {
    /// Violation amount in (0, 1/4]
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Measured functional value in (3/4, 1]
    #[arg(long, allow_negative_numbers = true)]
    pub violation: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FurScanArgs {
    /// Single-mode state file; coherent states over the gamma grid when absent
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, default_value = "even")]
    pub parity: Parity,
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    pub gamma_start: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub gamma_stop: f64,
    #[arg(long, default_value_t = 0.5)]
    pub gamma_step: f64,
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    pub beta_start: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub beta_stop: f64,
    #[arg(long, default_value_t = 0.1)]
    pub beta_step: f64,
}

/// Failure of a command, already mapped to its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::DegenerateConditioning { .. } => EXIT_DEGENERATE,
            Error::EmptyGrid(_) => EXIT_EMPTY_SCAN,
            Error::NumericalConsistency(_) | Error::NonHermitianOperator { .. } => EXIT_FAILURE,
            _ => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn write_file(path: impl AsRef<Path>, contents: impl AsRef<[u8]>) -> CliResult<()> {
    let path = path.as_ref();
    std::fs::write(path, contents).map_err(|e| CliError {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    })
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let g = &cli.global;
    validate_global(g)?;
    let config = json!({ "global": g, "command": cli.command });
    match &cli.command {
        Command::Fig1(args) => cmd_fig1(g, args, config, stdout),
        Command::NoonScan(args) => cmd_noon_scan(g, args, config, stdout),
        Command::SteerCheck(args) => cmd_steer_check(g, args, stdout),
        Command::Monogamy(args) => cmd_monogamy(g, args, config, stdout),
        Command::KeyRate(args) => cmd_key_rate(g, args, stdout),
        Command::Baseline => emit_record(g, &discrete_baseline(), stdout),
        Command::FurScan(args) => cmd_fur_scan(g, args, config, stdout),
    }
}

fn validate_global(g: &GlobalArgs) -> CliResult<()> {
    for (name, v) in [
        ("--tail-tol", g.tail_tol),
        ("--bound-tol", g.bound_tol),
        ("--beta-min", g.beta_min),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(config_error(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

fn meta_json(g: &GlobalArgs, dims: &[usize], config: &Value) -> Value {
    json!({
        "schema_version": SCAN_SCHEMA_VERSION,
        "tool": TOOL_NAME,
        "tool_version": TOOL_VERSION,
        "dims": dims,
        "tail_tolerance": g.tail_tol,
        "bound_tolerance": g.bound_tol,
        "seed": g.seed,
        "config": config,
    })
}

fn csv_header(meta: &Value) -> String {
    format!(
        "# {}\n",
        serde_json::to_string(meta).expect("metadata serializes")
    )
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn to_json_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn write_text(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// CSV with one row per cell: axis coordinates, `value_name`, then extra columns.
pub fn scan_to_csv(scan: &ScanResult, value_name: &str, meta: &Value) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header: Vec<&str> = scan.axes.iter().map(|a| a.name.as_str()).collect();
    header.push(value_name);
    header.extend(scan.columns.iter().map(|c| c.name.as_str()));
    w.write_record(&header).map_err(csv_err)?;
    for (i, v) in scan.values.iter().enumerate() {
        let mut row: Vec<String> = ScanResult::coordinates(&scan.axes, i)
            .iter()
            .map(f64::to_string)
            .collect();
        row.push(fmt_opt(*v));
        row.extend(scan.columns.iter().map(|c| fmt_opt(c.values[i])));
        w.write_record(&row).map_err(csv_err)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| csv_err(e.into_error().into()))?)
        .expect("csv output is utf-8");
    Ok(csv_header(meta) + &body)
}

fn csv_err(e: csv::Error) -> CliError {
    CliError {
        code: EXIT_IO,
        message: e.to_string(),
    }
}

fn with_meta(mut scan: ScanResult, g: &GlobalArgs, dims: &[usize], config: &Value) -> ScanResult {
    scan.meta.dims = dims.to_vec();
    scan.meta.tail_tolerance = g.tail_tol;
    scan.meta.bound_tolerance = g.bound_tol;
    scan.meta.seed = Some(g.seed);
    scan.meta.config = config.clone();
    scan
}

fn grid(start: f64, stop: f64, step: f64, what: &str) -> CliResult<Vec<f64>> {
    stepped_grid(start, stop, step).map_err(|e| config_error(format!("{what}: {e}")))
}

fn region(g: &GlobalArgs) -> CliResult<ValidityRegion> {
    Ok(ValidityRegion::new(g.beta_min, DEFAULT_PHOTON_FLOOR)?)
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn check_tail(tail: f64, dim: usize, tolerance: f64) -> CliResult<()> {
    if tail > tolerance {
        return Err(Error::Truncation {
            tail,
            tolerance,
            dim,
        }
        .into());
    }
    Ok(())
}

fn gnuplot_fig1(data: &Path) -> String {
    format!(
        "set datafile separator ','\n\
         set datafile commentschars '#'\n\
         set key autotitle columnhead\n\
         set xlabel 'gamma'\n\
         set ylabel 'average certainty'\n\
         set yrange [0:1]\n\
         plot '{0}' using 1:2 with lines title 'even sup', \\\n\
         \x20    '{0}' using 1:4 with lines dashtype 2 title 'odd inf', \\\n\
         \x20    0.75 with lines lc 'gray' notitle, 0.25 with lines lc 'gray' notitle\n",
        data.display()
    )
}

fn gnuplot_noon(data: &Path) -> String {
    format!(
        "set datafile separator ','\n\
         set datafile commentschars '#'\n\
         set datafile missing ''\n\
         set xlabel 'alpha'\n\
         set ylabel 'beta'\n\
         set zlabel 'steering functional'\n\
         set view map\n\
         set pm3d at b\n\
         splot '{}' using 1:2:3 every ::1 with points pointtype 5 pointsize 0.5 palette notitle\n",
        data.display()
    )
}

fn plot_script_path(out: &Path) -> PathBuf {
    out.with_extension("gp")
}

fn cmd_fig1(
    g: &GlobalArgs,
    args: &Fig1Args,
    config: Value,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let gammas = grid(
        args.gamma_start,
        args.gamma_stop,
        args.gamma_step,
        "gamma grid",
    )?;
    let betas = grid(args.beta_start, args.beta_stop, args.beta_step, "beta grid")?;
    let scan = with_meta(fig1_scan(&gammas, &betas, &region(g)?)?, g, &[], &config);
    let text = match g.format {
        Format::Csv => scan_to_csv(&scan, "even_sup", &meta_json(g, &[], &config))?,
        Format::Json => to_json_pretty(&scan),
    };
    write_text(g.out.as_deref(), &text, stdout)?;
    if let (Some(out), Format::Csv) = (&g.out, g.format) {
        write_file(plot_script_path(out), gnuplot_fig1(out))?;
    }
    Ok(())
}

fn cmd_noon_scan(
    g: &GlobalArgs,
    args: &NoonScanArgs,
    config: Value,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    if args.n == 0 {
        return Err(config_error("--n must be at least 1"));
    }
    let alphas = grid(
        args.alpha_start,
        args.alpha_stop,
        args.alpha_step,
        "alpha grid",
    )?;
    let betas = grid(args.beta_start, args.beta_stop, args.beta_step, "beta grid")?;
    let disp = max_abs(&alphas).max(max_abs(&betas));
    let dim = noon_dim(args.n, g.dim, disp);
    check_tail(displaced_number_tail(disp, args.n, dim)?, dim, g.tail_tol)?;
    let state = noon_state(args.n, dim)?;
    let scan = with_meta(
        violation_search(&state, &alphas, &betas, args.b, args.a)?,
        g,
        &[dim, dim],
        &config,
    );
    let meta = meta_json(g, &[dim, dim], &config);
    let render = |f: Format| -> CliResult<String> {
        Ok(match f {
            Format::Csv => scan_to_csv(&scan, "value", &meta)?,
            Format::Json => to_json_pretty(&scan),
        })
    };
    let max = scan.max();
    let summary = json!({
        "max": { "value": max.value, "alpha": max.location[0], "beta": max.location[1],
                 "margin_over_upper": max.value - crate::fur::FUR_UPPER },
        "min": { "value": scan.min().value, "alpha": scan.min().location[0], "beta": scan.min().location[1],
                 "margin_under_lower": crate::fur::FUR_LOWER - scan.min().value },
        "evaluated_cells": scan.evaluated_cells(),
        "cells": scan.values.len(),
        "dims": [dim, dim],
    });
    match &g.out {
        Some(out) => {
            write_file(out, render(g.format)?)?;
            let companion = out.with_extension(g.format.other().extension());
            write_file(&companion, render(g.format.other())?)?;
            let csv_path = if g.format == Format::Csv {
                out.clone()
            } else {
                companion
            };
            write_file(plot_script_path(out), gnuplot_noon(&csv_path))?;
            stdout.write_all(to_json_pretty(&summary).as_bytes())?;
        }
        None => stdout.write_all(render(g.format)?.as_bytes())?,
    }
    Ok(())
}

fn load_state(path: &Path) -> CliResult<MultiModeState> {
    read_state_file(path)
        .map_err(|e| CliError {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        })?
        .map_err(|e| CliError {
            code: EXIT_CONFIG,
            message: format!("{}: {e}", path.display()),
        })
}

fn cmd_steer_check(g: &GlobalArgs, args: &SteerCheckArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let state = load_state(&args.state)?;
    if state.modes() != 2 {
        return Err(config_error(format!(
            "steer-check needs a two-mode state, got {}",
            state.modes()
        )));
    }
    let settings = SteeringSettings::new(
        [
            ParitySetting::new(args.a, args.alpha)?,
            ParitySetting::new(args.a, args.alpha2.unwrap_or(-args.alpha))?,
        ],
        [
            ParitySetting::new(args.b, args.beta)?,
            ParitySetting::new(args.b, args.beta2.unwrap_or(-args.beta))?,
        ],
    );
    let report = steering_functional_with_tolerance(&state, settings, g.bound_tol)?;
    let text = to_json_pretty(&report);
    if let Some(out) = &g.out {
        write_file(out, &text)?;
    }
    stdout.write_all(text.as_bytes())?;
    Ok(())
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Even => "even",
        Parity::Odd => "odd",
    }
}

fn cmd_monogamy(
    g: &GlobalArgs,
    args: &MonogamyArgs,
    config: Value,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    if args.samples == 0 {
        return Err(config_error("--samples must be positive"));
    }
    let dim = g.dim.resolve(args.gamma_max, args.displacement_max);
    let sampler = MonogamySamplerConfig {
        max_terms: args.max_terms,
        gamma_min: args.gamma_min,
        gamma_max: args.gamma_max,
        displacement_min: g.beta_min,
        displacement_max: args.displacement_max,
        dim,
    };
    if args.displacement_max.is_nan() || args.displacement_max < g.beta_min {
        return Err(config_error(
            "--displacement-max must be at least --beta-min",
        ));
    }
    let reach = args.gamma_max.abs() + args.displacement_max.abs();
    check_tail(poisson_tail(reach * reach, dim), dim, g.tail_tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let samples = draw_monogamy_samples(&mut rng, args.samples, &sampler)?;
    let reports = evaluate_monogamy_samples(&samples, &sampler, g.bound_tol)?;
    let failures: Vec<usize> = reports
        .iter()
        .zip(&samples)
        .filter(|(r, _)| !r.within_bounds)
        .map(|(_, s)| s.index)
        .collect();
    let combined = reports.iter().map(|r| r.combined);
    let meta = meta_json(g, &[dim, dim, dim], &config);
    let summary = json!({
        "meta": meta,
        "samples": reports.len(),
        "within_bounds": reports.len() - failures.len(),
        "failures": failures,
        "combined_min": combined.clone().fold(f64::INFINITY, f64::min),
        "combined_max": combined.fold(f64::NEG_INFINITY, f64::max),
    });
    let text = match g.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "index",
                "terms",
                "a",
                "alpha",
                "b",
                "beta",
                "c",
                "gamma_c",
                "sigma_ba",
                "sigma_bc",
                "combined",
                "within_bounds",
            ])
            .map_err(csv_err)?;
            for (s, r) in samples.iter().zip(&reports) {
                w.write_record([
                    s.index.to_string(),
                    s.weights.len().to_string(),
                    parity_name(s.alice[0].outcome).to_string(),
                    s.alice[0].displacement.to_string(),
                    parity_name(s.bob[0].outcome).to_string(),
                    s.bob[0].displacement.to_string(),
                    parity_name(s.charlie[0].outcome).to_string(),
                    s.charlie[0].displacement.to_string(),
                    r.sigma_ba.to_string(),
                    r.sigma_bc.to_string(),
                    r.combined.to_string(),
                    r.within_bounds.to_string(),
                ])
                .map_err(csv_err)?;
            }
            let body = w.into_inner().map_err(|e| csv_err(e.into_error().into()))?;
            csv_header(&meta) + &String::from_utf8(body).expect("csv output is utf-8")
        }
        Format::Json => {
            let rows: Vec<Value> = samples
                .iter()
                .zip(&reports)
                .map(|(s, r)| json!({ "sample": s, "report": r }))
                .collect();
            to_json_pretty(&json!({ "meta": meta, "samples": rows }))
        }
    };
    match &g.out {
        Some(out) => {
            write_file(out, text)?;
            let summary_text = to_json_pretty(&summary);
            write_file(out.with_extension("summary.json"), &summary_text)?;
            stdout.write_all(summary_text.as_bytes())?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_key_rate(g: &GlobalArgs, args: &KeyRateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let delta = match (args.delta, args.violation) {
        (Some(d), None) => d,
        (None, Some(v)) => delta_from_violation(v)?,
        _ => return Err(config_error("give exactly one of --delta or --violation")),
    };
    emit_record(g, &key_rate_lower_bound(delta)?, stdout)
}

fn emit_record<T: Serialize>(g: &GlobalArgs, record: &T, stdout: &mut dyn Write) -> CliResult<()> {
    let text = to_json_pretty(record);
    if let Some(out) = &g.out {
        write_file(out, &text)?;
    }
    stdout.write_all(text.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct FurRow {
    gamma: Option<f64>,
    beta: f64,
    parity: Parity,
    value: f64,
    in_validity_region: bool,
    within_bounds: bool,
}

fn cmd_fur_scan(
    g: &GlobalArgs,
    args: &FurScanArgs,
    config: Value,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    use rayon::prelude::*;
    let betas = grid(args.beta_start, args.beta_stop, args.beta_step, "beta grid")?;
    let region = region(g)?;
    let states: Vec<(Option<f64>, MultiModeState)> = match &args.state {
        Some(path) => {
            let s = load_state(path)?;
            if s.modes() != 1 {
                return Err(config_error(format!(
                    "fur-scan needs a single-mode state, got {} modes",
                    s.modes()
                )));
            }
            vec![(None, s)]
        }
        None => {
            let gammas = grid(
                args.gamma_start,
                args.gamma_stop,
                args.gamma_step,
                "gamma grid",
            )?;
            let dim = g.dim.resolve(max_abs(&gammas), max_abs(&betas));
            gammas
                .iter()
                .map(|&gm| {
                    Ok((
                        Some(gm),
                        MultiModeState::single(coherent_state_with_tolerance(gm, dim, g.tail_tol)?),
                    ))
                })
                .collect::<CliResult<_>>()?
        }
    };
    let dims = vec![states[0].1.dims()[0]];
    let rows: Vec<FurRow> = states
        .par_iter()
        .flat_map_iter(|(gamma, s)| betas.iter().map(move |&b| (gamma, s, b)))
        .map(|(gamma, s, beta)| {
            let r = check_fur(s, beta, args.parity, &region, g.bound_tol)?;
            Ok(FurRow {
                gamma: *gamma,
                beta,
                parity: args.parity,
                value: r.value,
                in_validity_region: r.in_validity_region,
                within_bounds: r.within_bounds,
            })
        })
        .collect::<Result<_, Error>>()?;
    let meta = meta_json(g, &dims, &config);
    let text = match g.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "gamma",
                "beta",
                "parity",
                "value",
                "in_validity_region",
                "within_bounds",
            ])
            .map_err(csv_err)?;
            for r in &rows {
                w.write_record([
                    fmt_opt(r.gamma),
                    r.beta.to_string(),
                    parity_name(r.parity).to_string(),
                    r.value.to_string(),
                    r.in_validity_region.to_string(),
                    r.within_bounds.to_string(),
                ])
                .map_err(csv_err)?;
            }
            let body = w.into_inner().map_err(|e| csv_err(e.into_error().into()))?;
            csv_header(&meta) + &String::from_utf8(body).expect("csv output is utf-8")
        }
        Format::Json => to_json_pretty(&json!({ "meta": meta, "rows": rows })),
    };
    write_text(g.out.as_deref(), &text, stdout)
}
