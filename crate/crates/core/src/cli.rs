//! The `sigwin` command line.
//!
//! Subcommands:
//!
//! - `climate`: write a reference temperature/demand CSV.
//! - `synth`: replace the demand of a CSV by synthetic demand driven by
//!   smoothed temperature.
//! - `experiment`: evaluate RidgeSig and baselines on the test year, or sweep
//!   window sizes and truncation orders.
//! - `bench`: time the incremental update against per-window recomputation.
//! - `sigdump`: write the per-window feature table as CSV.
//!
//! Options may also come from a config file (`--config`) of `key = value`
//! lines whose keys are the long option names without dashes, e.g.
//! `window-days = 9`. Command-line flags take precedence. `#` starts a
//! comment. `SIGWIN_THREADS` sets the worker thread count.
//!
//! Every command that writes files also writes a run manifest next to its
//! main output (`<out>.manifest`) in the same `key = value` format: the
//! effective options, SHA-256 digests of inputs and outputs, the seed, and
//! wall time per phase. Apart from the `time.*` lines, identical inputs and
//! options produce byte-identical files.
//!
//! # Model file
//!
//! `experiment --save-model PATH` writes the refit RidgeSig model, one field
//! per line:
//!
//! ```text
//! format = sigwin-ridge-v1
//! lambda = 100
//! intercept = -3.25
//! features = 26
//! feature_means = <26 space-separated values>
//! feature_scales = <26 space-separated values>
//! theta = <26 space-separated values>
//! ```
//!
//! Numbers use the shortest decimal form that parses back to the same
//! `f64`. `theta` acts on standardized features `(x - mean) / scale`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::bench::{run_bench, BenchConfig};
use crate::data::{
    format_timestamp, gen_synthetic, load_csv, reference_climate, write_csv, ClimateConfig,
};
use crate::error::{Error, Result};
use crate::pipeline::{
    best_cell, EvaluationReport, Experiment, ForecastConfig, ModelSpec, SweepCell,
};
use crate::ridge::{default_lambda_grid, log_grid, RidgeModel};

#[derive(Debug, Parser)]
#[command(
    name = "sigwin",
    version,
    about = "Sliding-window signature forecasting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a reference temperature/demand series as CSV.
    Climate(ClimateArgs),
    /// Generate synthetic demand from the temperature of an input CSV.
    Synth(SynthArgs),
    /// Evaluate models on the test split, or sweep windows and orders.
    Experiment(ExperimentArgs),
    /// Benchmark incremental sliding updates against recomputation.
    Bench(BenchArgs),
    /// Dump per-window signature features as CSV.
    Sigdump(SigdumpArgs),
}

#[derive(Debug, Args)]
pub struct ClimateArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2012)]
    pub seed: u64,
    #[arg(long, default_value_t = 1461)]
    pub days: usize,
    #[arg(long, default_value_t = 48)]
    pub steps_per_day: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Window length in days: `9`, `2,4,9` or `2..32`.
    #[arg(long)]
    pub window_days: Option<String>,
    /// Truncation order: `4`, `2,4,6` or `2..7`.
    #[arg(long)]
    pub order: Option<String>,
    #[arg(long)]
    pub delay_days: Option<usize>,
    /// `low:high:count` (log-spaced) or a comma-separated list.
    #[arg(long)]
    pub lambda_grid: Option<String>,
    /// `synthetic`, `real`, or a list such as `ridgesig,lr:T+T2`.
    #[arg(long)]
    pub models: Option<String>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Smoothing parameter of the `Tbar` baseline features.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub train_end_year: Option<i32>,
    #[arg(long)]
    pub valid_end_year: Option<i32>,
    /// Machine-readable report (key = value) or sweep CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-row test forecasts as CSV.
    #[arg(long)]
    pub forecast_out: Option<PathBuf>,
    #[arg(long)]
    pub save_model: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub slides: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SigdumpArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub window_days: Option<usize>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parses arguments, runs, prints errors to stderr; returns the exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("sigwin: {e}");
        return 1;
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("sigwin: {e}");
            1
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SIGWIN_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Config(format!("SIGWIN_THREADS must be an integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

/// Runs a parsed command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> Result<()> {
    match cli.command {
        Command::Climate(a) => cmd_climate(a, out),
        Command::Synth(a) => cmd_synth(a, out),
        Command::Experiment(a) => cmd_experiment(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Sigdump(a) => cmd_sigdump(a, out),
    }
}

/// `key = value` settings from a config file.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get_str(&self, key: &str) -> Option<String> {
        self.values.get(key).cloned()
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }
}

fn pick<T: std::str::FromStr>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

fn required<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing required option --{name}")))
}

/// Parses `9`, `2,4,9` or `2..32` (inclusive).
pub fn parse_usize_set(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("cannot parse `{s}` as a number, list or range"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect()
}

/// Parses `low:high:count` (log-spaced) or a comma-separated list.
pub fn parse_lambda_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("cannot parse lambda grid `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let low: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let high: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(low > 0.0 && high >= low && count > 0) {
            return Err(bad());
        }
        return Ok(log_grid(low, high, count));
    }
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect()
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Run manifest, written as `key = value` lines.
#[derive(Debug, Default)]
pub struct RunManifest {
    command: String,
    config: Vec<(String, String)>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    seed: Option<u64>,
    timings: Vec<(String, f64)>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            ..Default::default()
        }
    }

    fn config(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.into(), value.to_string()));
    }

    fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings
            .push((phase.into(), start.elapsed().as_secs_f64()));
        out
    }

    pub fn render(&self) -> Result<String> {
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed = {seed}");
        }
        for (k, v) in &self.config {
            let _ = writeln!(s, "config.{k} = {v}");
        }
        for (i, p) in self.inputs.iter().enumerate() {
            let _ = writeln!(s, "input.{i}.path = {}", p.display());
            let _ = writeln!(s, "input.{i}.sha256 = {}", sha256_file(p)?);
        }
        for (i, p) in self.outputs.iter().enumerate() {
            let _ = writeln!(s, "output.{i}.path = {}", p.display());
            let _ = writeln!(s, "output.{i}.sha256 = {}", sha256_file(p)?);
        }
        for (phase, secs) in &self.timings {
            let _ = writeln!(s, "time.{phase}_s = {secs:.6}");
        }
        Ok(s)
    }

    /// Writes the manifest to `<main_output>.manifest` and returns its path.
    pub fn write_next_to(&self, main_output: &Path) -> Result<PathBuf> {
        let mut name = main_output.as_os_str().to_owned();
        name.push(".manifest");
        let path = PathBuf::from(name);
        fs::write(&path, self.render()?).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn io_out(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn cmd_climate(a: ClimateArgs, out: &mut dyn std::io::Write) -> Result<()> {
    let mut manifest = RunManifest::new("climate");
    manifest.seed = Some(a.seed);
    manifest.config("days", a.days);
    manifest.config("steps-per-day", a.steps_per_day);
    let config = ClimateConfig {
        days: a.days,
        steps_per_day: a.steps_per_day,
        seed: a.seed,
        ..ClimateConfig::default()
    };
    let frame = manifest.time("generate", || reference_climate(&config))?;
    manifest.time("write", || write_csv(&frame, &a.out))?;
    manifest.outputs.push(a.out.clone());
    let m = manifest.write_next_to(&a.out)?;
    writeln!(
        out,
        "wrote {} rows to {} (manifest {})",
        frame.len(),
        a.out.display(),
        m.display()
    )
    .map_err(io_out)
}

/// Defaults for `synth`.
pub const SYNTH_DEFAULTS: (f64, f64, u64) = (0.005, 1000.0, 7);

fn cmd_synth(a: SynthArgs, out: &mut dyn std::io::Write) -> Result<()> {
    let file = ConfigFile::load(a.config.as_deref())?;
    let input: PathBuf = required(pick(a.input, &file, "in")?, "in")?;
    let output: PathBuf = required(pick(a.out, &file, "out")?, "out")?;
    let alpha = pick(a.alpha, &file, "alpha")?.unwrap_or(SYNTH_DEFAULTS.0);
    let sigma = pick(a.sigma, &file, "sigma")?.unwrap_or(SYNTH_DEFAULTS.1);
    let seed = pick(a.seed, &file, "seed")?.unwrap_or(SYNTH_DEFAULTS.2);

    let mut manifest = RunManifest::new("synth");
    manifest.seed = Some(seed);
    manifest.config("alpha", alpha);
    manifest.config("sigma", sigma);
    let frame = manifest.time("load", || load_csv(&input))?;
    manifest.inputs.push(input);
    let synth = manifest.time("generate", || {
        gen_synthetic(frame.temperature(), frame.demand(), alpha, sigma, seed)
    })?;
    manifest.config("theta0", synth.theta0);
    manifest.config("theta1", synth.theta1);
    manifest.config("theta2", synth.theta2);
    let frame = frame.with_demand(synth.demand)?;
    manifest.time("write", || write_csv(&frame, &output))?;
    manifest.outputs.push(output.clone());
    manifest.write_next_to(&output)?;
    writeln!(
        out,
        "synthetic demand = {} + {} * Tbar + {} * Tbar^2 (alpha {alpha}, sigma {sigma}, seed {seed}); {} rows -> {}",
        synth.theta0,
        synth.theta1,
        synth.theta2,
        frame.len(),
        output.display()
    )
    .map_err(io_out)
}

fn experiment_config(
    a: &ExperimentArgs,
    file: &ConfigFile,
) -> Result<(ForecastConfig, Vec<usize>, Vec<usize>)> {
    let d = ForecastConfig::default();
    let windows = match pick(a.window_days.clone(), file, "window-days")? {
        Some(s) => parse_usize_set(&s)?,
        None => vec![d.window_days],
    };
    let orders = match pick(a.order.clone(), file, "order")? {
        Some(s) => parse_usize_set(&s)?,
        None => vec![d.order],
    };
    let lambda_grid = match pick(a.lambda_grid.clone(), file, "lambda-grid")? {
        Some(s) => parse_lambda_grid(&s)?,
        None => default_lambda_grid(),
    };
    let config = ForecastConfig {
        window_days: windows[0],
        order: orders[0],
        delay_days: pick(a.delay_days, file, "delay-days")?.unwrap_or(d.delay_days),
        lambda_grid,
        alpha: pick(a.alpha, file, "alpha")?.unwrap_or(d.alpha),
        stride: pick(a.stride, file, "stride")?.unwrap_or(d.stride),
        train_end_year: pick(a.train_end_year, file, "train-end-year")?.unwrap_or(d.train_end_year),
        valid_end_year: pick(a.valid_end_year, file, "valid-end-year")?.unwrap_or(d.valid_end_year),
        ..d
    };
    for &w in &windows {
        ForecastConfig {
            window_days: w,
            ..config.clone()
        }
        .validate()?;
    }
    Ok((config, windows, orders))
}

fn fmt_list<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn cmd_experiment(a: ExperimentArgs, out: &mut dyn std::io::Write) -> Result<()> {
    let file = ConfigFile::load(a.config.as_deref())?;
    let input: PathBuf = required(pick(a.input.clone(), &file, "in")?, "in")?;
    let (config, windows, orders) = experiment_config(&a, &file)?;
    let models = match pick(a.models.clone(), &file, "models")? {
        Some(s) => ModelSpec::parse_list(&s)?,
        None => ModelSpec::synthetic_suite(),
    };
    let report_path: Option<PathBuf> = pick(a.out.clone(), &file, "out")?;
    let forecast_path: Option<PathBuf> = pick(a.forecast_out.clone(), &file, "forecast-out")?;
    let model_path: Option<PathBuf> = pick(a.save_model.clone(), &file, "save-model")?;

    let mut manifest = RunManifest::new("experiment");
    manifest.config("window-days", fmt_list(&windows));
    manifest.config("order", fmt_list(&orders));
    manifest.config("delay-days", config.delay_days);
    manifest.config("lambda-grid", fmt_list(&config.lambda_grid));
    manifest.config("alpha", config.alpha);
    manifest.config("stride", config.stride);
    manifest.config("train-end-year", config.train_end_year);
    manifest.config("valid-end-year", config.valid_end_year);
    manifest.config("models", fmt_list(&models));

    let frame = manifest.time("load", || load_csv(&input))?;
    manifest.inputs.push(input);
    let experiment = manifest.time("prepare", || Experiment::new(&frame, config))?;

    if windows.len() > 1 || orders.len() > 1 {
        let cells = manifest.time("sweep", || experiment.sweep(&windows, &orders))?;
        out.write_all(render_sweep_table(&cells).as_bytes())
            .map_err(io_out)?;
        if let Some(p) = &report_path {
            write_file(p, &render_sweep_csv(&cells))?;
            manifest.outputs.push(p.clone());
        }
    } else {
        let report = manifest.time("evaluate", || experiment.evaluate(&models))?;
        out.write_all(render_report_table(&report).as_bytes())
            .map_err(io_out)?;
        if let Some(p) = &report_path {
            write_file(p, &render_report_kv(&report))?;
            manifest.outputs.push(p.clone());
        }
        if let Some(p) = &forecast_path {
            write_file(p, &render_forecast_csv(&experiment, &report))?;
            manifest.outputs.push(p.clone());
        }
        if let Some(p) = &model_path {
            let (_, fit) = manifest.time("refit", || experiment.ridgesig())?;
            write_file(p, &write_model(&fit.model))?;
            manifest.outputs.push(p.clone());
        }
    }
    if let Some(main) = manifest.outputs.first().cloned() {
        manifest.write_next_to(&main)?;
    }
    Ok(())
}

/// Human-readable table of test metrics.
pub fn render_report_table(report: &EvaluationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<34} {:>10} {:>9} {:>10}",
        "model", "RMSE (MW)", "MAPE (%)", "lambda"
    );
    for m in &report.models {
        let lambda = m
            .lambda
            .map_or_else(|| "-".to_string(), |l| format!("{l:e}"));
        let _ = writeln!(
            s,
            "{:<34} {:>10.0} {:>9.2} {:>10}",
            m.name, m.rmse, m.mape, lambda
        );
    }
    s
}

/// Machine-readable report, one `key = value` per line.
pub fn render_report_kv(report: &EvaluationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "split = {}", report.split);
    let _ = writeln!(s, "rows = {}", report.actual.len());
    for m in &report.models {
        let _ = writeln!(s, "model.{}.rmse_mw = {}", m.name, m.rmse);
        let _ = writeln!(s, "model.{}.mape_pct = {}", m.name, m.mape);
        if let Some(l) = m.lambda {
            let _ = writeln!(s, "model.{}.lambda = {l}", m.name);
        }
    }
    s
}

fn render_forecast_csv(experiment: &Experiment, report: &EvaluationReport) -> String {
    let mut s = String::from("timestamp,actual");
    for m in &report.models {
        let _ = write!(s, ",\"{}\"", m.name);
    }
    s.push('\n');
    let ts = experiment.frame().timestamps();
    for (i, a) in report.actual.iter().enumerate() {
        let _ = write!(s, "{},{a}", format_timestamp(&ts[report.first_t + i]));
        for m in &report.models {
            let _ = write!(s, ",{}", m.forecast[i]);
        }
        s.push('\n');
    }
    s
}

pub fn render_sweep_table(cells: &[SweepCell]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>6} {:>5} {:>10} {:>12} {:>12} {:>9}",
        "window", "order", "lambda", "valid RMSE", "test RMSE", "test MAPE"
    );
    for c in cells {
        let _ = writeln!(
            s,
            "{:>6} {:>5} {:>10.0e} {:>12.0} {:>12.0} {:>9.2}",
            c.window_days, c.order, c.lambda, c.validation_rmse, c.test_rmse, c.test_mape
        );
    }
    if let Some(b) = best_cell(cells, |c| c.validation_rmse) {
        let _ = writeln!(
            s,
            "best on validation: window {} days, order {} (test RMSE {:.0} MW)",
            b.window_days, b.order, b.test_rmse
        );
    }
    s
}

/// Sweep results as CSV, one row per cell.
pub fn render_sweep_csv(cells: &[SweepCell]) -> String {
    let mut s =
        String::from("window_days,order,lambda,validation_rmse_mw,test_rmse_mw,test_mape_pct\n");
    for c in cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            c.window_days, c.order, c.lambda, c.validation_rmse, c.test_rmse, c.test_mape
        );
    }
    s
}

fn cmd_bench(a: BenchArgs, out: &mut dyn std::io::Write) -> Result<()> {
    let file = ConfigFile::load(a.config.as_deref())?;
    let d = BenchConfig::default();
    let config = BenchConfig {
        dim: pick(a.dim, &file, "dim")?.unwrap_or(d.dim),
        order: pick(a.order, &file, "order")?.unwrap_or(d.order),
        window: pick(a.window, &file, "window")?.unwrap_or(d.window),
        slides: pick(a.slides, &file, "slides")?.unwrap_or(d.slides),
        seed: pick(a.seed, &file, "seed")?.unwrap_or(d.seed),
    };
    let report = run_bench(&config)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "d = {}, N = {}, w = {}, {} slides",
        config.dim, config.order, config.window, config.slides
    );
    let _ = writeln!(
        s,
        "incremental: {:.4} s, {} products ({} per slide)",
        report.incremental_seconds,
        report.incremental_products,
        report.incremental_products_per_slide()
    );
    let _ = writeln!(
        s,
        "naive:       {:.4} s, {} products ({} per slide)",
        report.naive_seconds,
        report.naive_products,
        report.naive_products_per_slide()
    );
    let _ = writeln!(s, "speedup:     {:.1}x", report.speedup());
    let _ = writeln!(
        s,
        "final max relative difference: {:e}",
        report.final_relative_error
    );
    out.write_all(s.as_bytes()).map_err(io_out)?;

    if let Some(p) = pick(a.out, &file, "out")? {
        let mut kv = String::new();
        let _ = writeln!(kv, "dim = {}", config.dim);
        let _ = writeln!(kv, "order = {}", config.order);
        let _ = writeln!(kv, "window = {}", config.window);
        let _ = writeln!(kv, "slides = {}", config.slides);
        let _ = writeln!(kv, "seed = {}", config.seed);
        let _ = writeln!(kv, "incremental_products = {}", report.incremental_products);
        let _ = writeln!(kv, "naive_products = {}", report.naive_products);
        let _ = writeln!(kv, "incremental_seconds = {}", report.incremental_seconds);
        let _ = writeln!(kv, "naive_seconds = {}", report.naive_seconds);
        let _ = writeln!(kv, "final_relative_error = {}", report.final_relative_error);
        write_file(&p, &kv)?;
        let mut manifest = RunManifest::new("bench");
        manifest.seed = Some(config.seed);
        manifest.outputs.push(p.clone());
        manifest
            .timings
            .push(("incremental".into(), report.incremental_seconds));
        manifest
            .timings
            .push(("naive".into(), report.naive_seconds));
        manifest.write_next_to(&p)?;
    }
    Ok(())
}

fn cmd_sigdump(a: SigdumpArgs, out: &mut dyn std::io::Write) -> Result<()> {
    let file = ConfigFile::load(a.config.as_deref())?;
    let input: PathBuf = required(pick(a.input, &file, "in")?, "in")?;
    let d = ForecastConfig::default();
    let config = ForecastConfig {
        window_days: pick(a.window_days, &file, "window-days")?.unwrap_or(d.window_days),
        order: pick(a.order, &file, "order")?.unwrap_or(d.order),
        stride: pick(a.stride, &file, "stride")?.unwrap_or(d.stride),
        // Delay is irrelevant to features; keep the config valid for any window.
        delay_days: 1,
        ..d
    };
    let output: Option<PathBuf> = pick(a.out, &file, "out")?;

    let mut manifest = RunManifest::new("sigdump");
    manifest.config("window-days", config.window_days);
    manifest.config("order", config.order);
    manifest.config("stride", config.stride);
    let frame = manifest.time("load", || load_csv(&input))?;
    manifest.inputs.push(input);
    let frame = frame.subsample(config.stride)?;
    let spd = frame.steps_per_day();
    if spd == 0 {
        return Err(Error::Config("sampling step does not divide a day".into()));
    }
    let table = manifest.time("features", || {
        crate::pipeline::build_feature_table(
            &crate::linalg::Matrix::column(frame.temperature()),
            config.order,
            config.window_days * spd,
        )
    })?;
    let csv = render_feature_csv(&table, frame.timestamps());
    match &output {
        Some(p) => {
            write_file(p, &csv)?;
            manifest.outputs.push(p.clone());
            manifest.write_next_to(p)?;
        }
        None => out.write_all(csv.as_bytes()).map_err(io_out)?,
    }
    Ok(())
}

/// Feature table as CSV: `t,timestamp` then one quoted column per
/// multi-index, e.g. `"S(1,2)"`.
pub fn render_feature_csv(
    table: &crate::pipeline::FeatureTable,
    timestamps: &[chrono::DateTime<chrono::Utc>],
) -> String {
    let mut s = String::from("t,timestamp");
    for idx in &table.indices {
        let _ = write!(s, ",\"S{idx}\"");
    }
    s.push('\n');
    for (i, row) in table.features.iter_rows().enumerate() {
        let t = table.first_t + i;
        let _ = write!(s, "{t},{}", format_timestamp(&timestamps[t]));
        for v in row {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

const MODEL_FORMAT: &str = "sigwin-ridge-v1";

fn join_floats(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Serializes a ridge model in the line format documented above.
pub fn write_model(model: &RidgeModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "format = {MODEL_FORMAT}");
    let _ = writeln!(s, "lambda = {}", model.lambda);
    let _ = writeln!(s, "intercept = {}", model.intercept);
    let _ = writeln!(s, "features = {}", model.num_features());
    let _ = writeln!(s, "feature_means = {}", join_floats(&model.feature_means));
    let _ = writeln!(s, "feature_scales = {}", join_floats(&model.feature_scales));
    let _ = writeln!(s, "theta = {}", join_floats(&model.theta));
    s
}

/// Parses the output of [`write_model`].
pub fn read_model(text: &str) -> Result<RidgeModel> {
    let file = ConfigFile::parse(text, Path::new("<model>"))?;
    if file.get_str("format").as_deref() != Some(MODEL_FORMAT) {
        return Err(Error::Config(format!(
            "model format must be `{MODEL_FORMAT}`"
        )));
    }
    let n: usize = required(file.get("features")?, "features")?;
    let floats = |key: &str| -> Result<Vec<f64>> {
        let raw = file.get_str(key).unwrap_or_default();
        let v = raw
            .split_whitespace()
            .map(|x| {
                x.parse()
                    .map_err(|_| Error::Config(format!("model field `{key}`: bad number `{x}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if v.len() != n {
            return Err(Error::Config(format!(
                "model field `{key}` has {} values, expected {n}",
                v.len()
            )));
        }
        Ok(v)
    };
    let model = RidgeModel {
        theta: floats("theta")?,
        intercept: required(file.get("intercept")?, "intercept")?,
        lambda: required(file.get("lambda")?, "lambda")?,
        feature_means: floats("feature_means")?,
        feature_scales: floats("feature_scales")?,
    };
    if model
        .feature_scales
        .iter()
        .any(|s| *s <= 0.0 || !s.is_finite())
    {
        return Err(Error::Config("feature scales must be positive".into()));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usize_sets() {
        assert_eq!(parse_usize_set("9").unwrap(), vec![9]);
        assert_eq!(parse_usize_set("2,4, 9").unwrap(), vec![2, 4, 9]);
        assert_eq!(parse_usize_set("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_usize_set("2..=3").unwrap(), vec![2, 3]);
        assert!(parse_usize_set("5..2").is_err());
        assert!(parse_usize_set("x").is_err());
    }

    #[test]
    fn lambda_grids() {
        assert_eq!(
            parse_lambda_grid("1e-6:1e6:13").unwrap(),
            log_grid(1e-6, 1e6, 13)
        );
        assert_eq!(
            parse_lambda_grid("0.1, 1,10").unwrap(),
            vec![0.1, 1.0, 10.0]
        );
        assert!(parse_lambda_grid("1:0.1:3").is_err());
    }

    #[test]
    fn config_file_parsing() {
        let f = ConfigFile::parse(
            "# comment\nwindow-days = 9 # inline\n\nalpha=0.05\n",
            Path::new("x"),
        )
        .unwrap();
        assert_eq!(f.get::<usize>("window-days").unwrap(), Some(9));
        assert_eq!(f.get::<f64>("alpha").unwrap(), Some(0.05));
        assert_eq!(f.get::<f64>("sigma").unwrap(), None);
        assert!(f.get::<usize>("alpha").is_err());
        assert!(ConfigFile::parse("novalue\n", Path::new("x")).is_err());
        assert_eq!(pick(Some(3usize), &f, "window-days").unwrap(), Some(3));
    }

    #[test]
    fn model_round_trip() {
        let m = RidgeModel {
            theta: vec![0.1, -2.5e-7, 3.0],
            intercept: -1.0 / 3.0,
            lambda: 1e-6,
            feature_means: vec![1.0, 2.0, 1e10],
            feature_scales: vec![0.5, 1.0, 7.123456789],
        };
        let text = write_model(&m);
        assert!(text.starts_with("format = sigwin-ridge-v1\n"));
        assert_eq!(read_model(&text).unwrap(), m);
        assert!(read_model(&text.replace("features = 3", "features = 2")).is_err());
        assert!(read_model("format = other\n").is_err());
    }
}
