//! Command-line driver: sweeps, CBW/FP comparison reports and netlist
//! compilation.
//!
//! Exit codes: 0 on success, 1 when a verification fails, 2 on usage,
//! parse or I/O errors.

pub mod config;
pub mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use cbwring_core::dsl::{self, Bindings};
use cbwring_core::fringe::zeta_invariance_with;
use cbwring_core::{
    cbw_order_matrix, fp_trace, measure_resolution, mode_traces, sagnac_phase, sweep_with,
    CavityConfig, FringeMetrics, LossExponent, Phase, SweepOptions,
};
use clap::{Args, Parser, Subcommand};

use config::{ConfigPaths, RunConfig, Settings};
use output::{AlternateGain, CompareReport, CsvColumns};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable input, unwritable output. Exit 2.
    Usage(String),
    /// A check ran and did not hold. Exit 1.
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Verification(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Verification(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cbwring_core::Error> for CliError {
    fn from(e: cbwring_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "cbwring", version, about = "CBW ring gyroscope simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the ring over a phase grid and write the intensities as CSV.
    Simulate(RunArgs),
    /// Measure the CBW trace against the Fabry-Perot baseline and write a
    /// JSON report. Exits 1 if an analytic case misses its tolerance.
    Compare(CompareArgs),
    /// Compile a netlist chain to its 2x2 transfer matrix.
    Compile(CompileArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat `key = value` file; keys are the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for the sweep (1 = serial).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Also write psi, I_A, I_B, I_FP as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Netlist file.
    pub file: PathBuf,
    /// Chain to compile (default: the last one defined).
    #[arg(long)]
    pub chain: Option<String>,
    /// Symbol binding NAME=VALUE; repeatable.
    #[arg(long = "bind", value_name = "NAME=VALUE")]
    pub bind: Vec<String>,
    /// Check the result against the closed-form first-order CBW matrix at
    /// the bound `psi`.
    #[arg(long)]
    pub verify_rotation: bool,
}

pub const DEFAULT_TRACE_PATH: &str = "trace.csv";
pub const DEFAULT_REPORT_PATH: &str = "report.json";
/// Agreement required by `compile --verify-rotation`.
pub const ROTATION_TOL: f64 = 1e-12;

impl RunArgs {
    fn resolve(&self, csv: Option<&PathBuf>, default_output: &str) -> Result<RunConfig, CliError> {
        let mut settings = Settings::default();
        let mut paths = ConfigPaths::default();
        if let Some(path) = &self.config {
            let (file_settings, file_paths) = Settings::from_config_file(path)?;
            settings.overlay(&file_settings);
            paths.overlay(&file_paths);
        }
        settings.overlay(&self.settings);
        paths.overlay(&ConfigPaths {
            output: self.output.clone(),
            csv: csv.cloned(),
        });
        if paths.output.is_none() {
            paths.output = Some(PathBuf::from(default_output));
        }
        settings.resolve(paths)
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(CliError::Usage("threads must be at least 1".into()));
            }
            builder = builder.num_threads(n);
        }
        builder
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))
    }
}

fn sweep_options(threads: Option<usize>) -> SweepOptions {
    SweepOptions {
        normalize: true,
        parallel: threads != Some(1),
    }
}

/// Parse `args` (including the program name) and run. Messages go to
/// `out` and `err`.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn main_exit() -> ExitCode {
    let code = run_from(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code)
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(args) => simulate(args, out),
        Command::Compare(args) => compare(args, out),
        Command::Compile(args) => compile(args, out),
    }
}

fn simulate(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.resolve(None, DEFAULT_TRACE_PATH)?;
    let pool = args.pool()?;
    let opts = sweep_options(args.threads);
    let (trace, fp, modes) = pool.install(|| -> Result<_, CliError> {
        let trace = sweep_with(&cfg.cavity, &cfg.grid, opts)?;
        let fp = if cfg.with_fp {
            Some(fp_trace(&cfg.fabry_perot, &cfg.grid)?)
        } else {
            None
        };
        let modes = mode_traces(&cfg.modes, &cfg.cavity, &cfg.grid)?;
        Ok((trace, fp, modes))
    })?;
    let path = cfg
        .output
        .clone()
        .unwrap_or_else(|| DEFAULT_TRACE_PATH.into());
    let columns = CsvColumns {
        trace: &trace,
        fp: fp.as_ref(),
        modes: &modes,
    };
    columns.write_file(&path)?;
    let _ = writeln!(
        out,
        "wrote {} points to {} (normalization {:.6e})",
        trace.len(),
        path.display(),
        trace.scale
    );
    Ok(())
}

/// Everything `compare` computes, before it is written anywhere.
pub fn compare_report(cfg: &RunConfig, opts: SweepOptions) -> Result<CompareReport, CliError> {
    let start = Instant::now();
    let cbw = sweep_with(&cfg.cavity, &cfg.grid, opts)?;
    let fp = fp_trace(&cfg.fabry_perot, &cfg.grid)?;
    let metrics = FringeMetrics::measure(&cbw, &fp, cfg.tol)?;
    let zeta_max_dev = zeta_invariance_with(&cfg.cavity, &cfg.zeta_grid, &cfg.grid, opts)?;
    let sagnac_psi = sagnac_phase(&cfg.sagnac)?.radians();

    let alternates = [
        (
            "global_phase_on",
            CavityConfig {
                include_global_phase: true,
                ..cfg.cavity
            },
        ),
        (
            "loss_exponent_2",
            CavityConfig {
                loss_exponent: LossExponent::Two,
                ..cfg.cavity
            },
        ),
    ];
    let mut alternate_conventions = Vec::new();
    for (name, alt) in alternates {
        let trace = sweep_with(&alt, &cfg.grid, opts)?;
        let res = measure_resolution(&trace, &fp).ok();
        alternate_conventions.push(AlternateGain {
            name: name.to_string(),
            fwhm_cbw: res.map(|r| r.fwhm_cbw),
            resolution_gain: res.map(|r| r.gain),
        });
    }

    Ok(CompareReport::new(
        cfg.clone(),
        metrics,
        zeta_max_dev,
        sagnac_psi,
        alternate_conventions,
        start.elapsed().as_secs_f64(),
        cbw,
        fp,
    ))
}

fn compare(args: &CompareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.run.resolve(args.csv.as_ref(), DEFAULT_REPORT_PATH)?;
    let pool = args.run.pool()?;
    let opts = sweep_options(args.run.threads);
    let report = pool.install(|| compare_report(&cfg, opts))?;

    let path = cfg
        .output
        .clone()
        .unwrap_or_else(|| DEFAULT_REPORT_PATH.into());
    report.write_json(&path)?;
    if let Some(csv) = &cfg.csv {
        report.write_csv(csv)?;
    }

    let _ = writeln!(out, "{}", report.summary());
    let _ = writeln!(out, "report written to {}", path.display());
    if report.cases.all_pass() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "analytic cases failed at tol {:e}: {}",
            cfg.tol,
            report.failed_cases().join(", ")
        )))
    }
}

fn compile(args: &CompileArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let source = fs::read_to_string(&args.file).map_err(|e| io_error(&args.file, e))?;
    let file = args.file.display();
    let ast = dsl::parse(&source).map_err(|diags| {
        let lines: Vec<String> = diags.iter().map(|d| format!("{file}:{d}")).collect();
        CliError::Usage(format!("cannot parse netlist\n{}", lines.join("\n")))
    })?;
    for warning in dsl::check(&ast) {
        eprintln!("{file}:{warning}");
    }

    let mut bindings = Bindings::new();
    for text in &args.bind {
        let (name, value) = Bindings::parse_assignment(text).map_err(CliError::Usage)?;
        bindings.insert(&name, value);
    }

    let index = match &args.chain {
        Some(name) => ast
            .index_of(name)
            .ok_or_else(|| CliError::Usage(format!("no chain named `{name}` in {file}")))?,
        None => ast
            .chains
            .len()
            .checked_sub(1)
            .ok_or_else(|| CliError::Usage(format!("{file} defines no chains")))?,
    };
    let chain_name = ast.chains[index].name.clone();
    let matrix = dsl::compile_chain_at(&ast, index, &bindings)?;

    let _ = write!(out, "{}", output::matrix_table(&chain_name, &matrix));
    let mut json = output::matrix_json(&chain_name, &bindings, &matrix);

    let mut verdict = Ok(());
    if args.verify_rotation {
        let psi = bindings
            .get("psi")
            .ok_or_else(|| CliError::Usage("--verify-rotation needs a binding for `psi`".into()))?;
        let closed = cbw_order_matrix(Phase::new(psi), 1, true)?;
        let deviation = matrix.max_abs_diff(&closed);
        let pass = deviation <= ROTATION_TOL;
        let _ = writeln!(
            out,
            "closed-form check at psi = {psi}: max deviation {deviation:.3e} ({})",
            if pass { "pass" } else { "FAIL" }
        );
        json["verify_rotation"] = serde_json::json!({
            "psi": psi,
            "max_deviation": deviation,
            "tol": ROTATION_TOL,
            "pass": pass,
        });
        if !pass {
            verdict = Err(CliError::Verification(format!(
                "chain `{chain_name}` deviates from -e^(i psi) R(psi) by {deviation:.3e}"
            )));
        }
    }
    let _ = writeln!(out, "{json}");
    verdict
}
