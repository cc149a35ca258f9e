use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qphase_cli::config::{
    parse_config, BackendSetting, ConfigError, CutoffSetting, Mode, RunConfig,
};
use qphase_cli::run::run;

#[derive(Parser)]
#[command(name = "qphase", version, about = "Phases of periodically driven two-level systems")]
struct Cli {
    /// TOML run configuration; defaults apply for anything omitted
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV and plot data
    #[arg(short, long, global = true, default_value = "out")]
    out: PathBuf,

    /// Fourier cutoff override (integer >= 8, or "auto")
    #[arg(long, global = true)]
    cutoff: Option<String>,

    /// Solver backend override
    #[arg(long, global = true, value_parser = ["hill", "series"])]
    backend: Option<String>,

    /// Oracle integration tolerance override
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    #[command(subcommand)]
    mode: Option<ModeArg>,
}

#[derive(Subcommand, Clone, Copy)]
enum ModeArg {
    /// Phase sweep over an (epsilon, omega) grid
    SingleSweep,
    /// Phases of one driven two-level system
    SinglePoint,
    /// Survival probabilities of a coupled pair over a Rabi cycle
    Composite,
    /// Composite phases against coupling strength
    KappaSweep,
    /// Composite phases against kick time
    T0Sweep,
    /// Two-qubit gate phases and B-form check
    Gate,
    /// Compare the series propagator against direct integration
    OracleCheck,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::SingleSweep => Mode::SingleSweep,
            ModeArg::SinglePoint => Mode::SinglePoint,
            ModeArg::Composite => Mode::Composite,
            ModeArg::KappaSweep => Mode::KappaSweep,
            ModeArg::T0Sweep => Mode::T0Sweep,
            ModeArg::Gate => Mode::Gate,
            ModeArg::OracleCheck => Mode::OracleCheck,
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::Syntax(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(mode) = cli.mode {
        cfg.mode = mode.into();
    }
    if let Some(c) = &cli.cutoff {
        cfg.numerics.cutoff = match c.parse::<u32>() {
            Ok(m) => CutoffSetting::Fixed(m),
            Err(_) => CutoffSetting::Named(c.clone()),
        };
    }
    if let Some(b) = &cli.backend {
        cfg.numerics.backend = if b == "series" {
            BackendSetting::Series
        } else {
            BackendSetting::Hill
        };
    }
    if let Some(tol) = cli.tolerance {
        cfg.numerics.oracle_tol = tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("qphase: configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg, &cli.out) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qphase: {e:#}");
            ExitCode::FAILURE
        }
    }
}
