use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, ValueEnum};

use srflp::exact::Backend;
use srflp::harness::{emit_report, load_instance, run_experiment, Config, HarnessError, ReportFormat};
use srflp::msa::SaParams;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Dp,
    Bruteforce,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    TableText,
}

/// Single-row facility layout by multi-start annealing and exact window re-optimization.
#[derive(Debug, Parser)]
#[command(name = "srflp", version)]
struct Cli {
    /// Instance file: n, the n lengths, then the weight matrix (full or upper triangle).
    #[arg(long)]
    instance: PathBuf,
    /// Independent runs.
    #[arg(long, default_value_t = 15)]
    runs: usize,
    /// Seed of the first run; run r uses seed + r.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Seconds per run [default: ceil(n^1.7)].
    #[arg(long)]
    time_limit: Option<f64>,
    /// Work-unit budget per run; overrides --time-limit and makes runs reproducible.
    #[arg(long)]
    iter_budget: Option<u64>,
    #[arg(long, default_value_t = 0.98)]
    alpha: f64,
    #[arg(long, default_value_t = 100)]
    zhat: usize,
    #[arg(long, default_value_t = 0.35)]
    p_swap: f64,
    #[arg(long, default_value_t = 0.35)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0001)]
    tmin: f64,
    /// Window sizes swept inside each restart.
    #[arg(long, value_delimiter = ',', default_value = "13")]
    wsv_msa: Vec<usize>,
    /// Window sizes of the final refinement.
    #[arg(long, value_delimiter = ',', default_value = "17,19")]
    wsv_refine: Vec<usize>,
    /// Local search only, no window re-optimization.
    #[arg(long)]
    no_window: bool,
    #[arg(long, value_enum, default_value_t = BackendArg::Dp)]
    backend: BackendArg,
    /// Write LP models of solved windows into this directory.
    #[arg(long)]
    export_mip: Option<PathBuf>,
    /// Models written per run at most.
    #[arg(long, default_value_t = 50)]
    export_limit: usize,
    /// Report file [default: standard output].
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Runs executed in parallel [default: all cores].
    #[arg(long)]
    jobs: Option<usize>,
}

fn config(cli: &Cli) -> Result<Config, HarnessError> {
    let time_limit = match cli.time_limit {
        Some(t) if !(t > 0.0 && t.is_finite()) => {
            return Err(srflp::ConfigError::Invalid { name: "time-limit", value: t.to_string(), reason: "must be positive" }.into())
        }
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    let mut params = SaParams {
        alpha: cli.alpha,
        z_hat: cli.zhat,
        p_swap: cli.p_swap,
        gamma: cli.gamma,
        t_min: cli.tmin,
        wsv_msa: cli.wsv_msa.clone(),
        wsv_refine: cli.wsv_refine.clone(),
        backend: match cli.backend {
            BackendArg::Dp => Backend::default(),
            BackendArg::Bruteforce => Backend::BruteForce,
        },
        ..SaParams::default()
    };
    if cli.no_window {
        params = params.without_windows();
    }
    Ok(Config {
        runs: cli.runs,
        seed: cli.seed,
        time_limit,
        iter_budget: cli.iter_budget,
        params,
        export_mip: cli.export_mip.clone(),
        export_limit: cli.export_limit,
        jobs: cli.jobs,
    })
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let cfg = config(&cli)?;
    cfg.validate()?;
    let inst = load_instance(&cli.instance)?;
    let name = cli.instance.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let report = run_experiment(&inst, &name, &cfg)?;
    let format = match cli.format {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::TableText => ReportFormat::TableText,
    };
    let text = emit_report(&report, format);
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|source| HarnessError::Write { path: path.clone(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("srflp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
